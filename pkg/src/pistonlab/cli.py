"""Command-line front end: figure reproduction, sweeps, and data export.

Subcommands
-----------
``figure3``
    Norm histories and error curves of powers of the added-damping operator,
    demonstrating monotone decay for small damping ratios and transient
    growth (nonmonotone convergence) for large ones.
``sweep``
    One-parameter convergence-rate sweep of the coupled piston problem.
``piston``
    Transient piston runs: monolithic, partitioned, or both with a deviation
    report.
``sensitivity``
    Pressure-level shift of a nearly-closed domain for a resistance change.
``operators``
    Apply one grid operator (or norm) to a sampled function, for scripting.

All outputs are CSV plus a flat key-value manifest per invocation; nothing
is plotted.  Outputs are deterministic: identical configs yield byte
identical files.  Exit codes: 0 converged/ok, 1 usage or configuration
error, 2 iteration cap reached, 3 diverged.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .coupling import (
    CouplingConfig,
    CouplingDivergedError,
    CouplingError,
    MaxIterationsExceededError,
)
from . import coupling, piston
from .operators import (
    GridFunction,
    OperatorConfig,
    apply_ld,
    apply_lm,
    commutator_norm,
    h1_norm,
    norm_history,
)
from .parameters import (
    PARAM_KEYS,
    ValidationError,
    nondimensionalize,
    params_from_config,
    read_config,
)
from .sensitivity import RobinBoundarySpec, pressure_shift
from .sweep import (
    DEFAULT_RATE_WINDOW,
    DEFAULT_SPIN_UP_TIME,
    SweepSpec,
    run_sweep,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MAX_ITERS = 2
EXIT_DIVERGED = 3

#: Solver/coupling keys accepted in the configuration file besides PARAM_KEYS.
SOLVER_KEYS = (
    "tol",
    "max_iters",
    "relaxation",
    "extrapolation_order",
    "n_substeps",
    "linearized",
    "spin_up_time",
    "rate_k_lo",
    "rate_k_hi",
)

CONFIG_KEYS = PARAM_KEYS + SOLVER_KEYS

_SOLVER_DEFAULTS = {
    "tol": 1e-10,
    "max_iters": 50,
    "relaxation": 1.0,
    "extrapolation_order": 1,
    "n_substeps": piston.DEFAULT_SUBSTEPS,
    "linearized": 0.0,
    "spin_up_time": DEFAULT_SPIN_UP_TIME,
    "rate_k_lo": DEFAULT_RATE_WINDOW[0],
    "rate_k_hi": DEFAULT_RATE_WINDOW[1],
}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with the documented code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str):
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty value list")
    return values


def _fmt(value) -> str:
    return repr(float(value))


def _write_manifest(out_dir: Path, name: str, entries: dict) -> None:
    lines = [f"{key} = {value}" for key, value in entries.items()]
    (out_dir / f"{name}_manifest.txt").write_text("\n".join(lines) + "\n")


def _load_run_config(args):
    """Read the config file into (params, coupling config, solver options)."""
    if not args.config:
        raise ValidationError("this subcommand requires --config <file>")
    config = read_config(args.config, known_keys=CONFIG_KEYS)
    params = params_from_config(config)
    options = dict(_SOLVER_DEFAULTS)
    for key in SOLVER_KEYS:
        if key in config:
            options[key] = config[key]
    cfg = CouplingConfig(
        tol=float(options["tol"]),
        max_iters=int(options["max_iters"]),
        relaxation=float(options["relaxation"]),
        extrapolation_order=int(options["extrapolation_order"]),
    )
    options["n_substeps"] = int(options["n_substeps"])
    options["linearized"] = bool(options["linearized"])
    return params, cfg, options


def cmd_figure3(args, out_dir: Path) -> int:
    """Write damping-operator power curves and their log10 norm ratios."""
    n = args.grid_n
    cfg = OperatorConfig(omega=args.omega, n=n)
    s = np.linspace(0.0, 1.0, n)
    eps0 = GridFunction(s * s)
    ratio_columns = {}
    curve_files = []
    for alpha_d in args.alpha_d:
        history = norm_history(cfg, 0.0, alpha_d, eps0, args.k_max)
        ratio_columns[alpha_d] = np.log10(history)
        curves = [eps0.values]
        values = eps0.values
        for _ in range(args.k_max):
            values = alpha_d * apply_ld(cfg, GridFunction(values)).values
            curves.append(values)
        path = out_dir / f"figure3_curves_alpha_{alpha_d:g}.csv"
        with open(path, "w", newline="") as stream:
            writer = csv.writer(stream)
            writer.writerow(["s"] + [f"k{k}" for k in range(args.k_max + 1)])
            for i in range(n):
                writer.writerow([_fmt(s[i])] + [_fmt(c[i]) for c in curves])
        curve_files.append(path.name)
    ratios_path = out_dir / "figure3_norm_ratios.csv"
    with open(ratios_path, "w", newline="") as stream:
        writer = csv.writer(stream)
        writer.writerow(["k"] + [f"log10_ratio_alpha_{a:g}" for a in args.alpha_d])
        for k in range(args.k_max + 1):
            writer.writerow([k] + [_fmt(ratio_columns[a][k]) for a in args.alpha_d])
    _write_manifest(
        out_dir,
        "figure3",
        {
            "command": "figure3",
            "version": __version__,
            "alpha_d": ",".join(f"{a:g}" for a in args.alpha_d),
            "omega": _fmt(args.omega),
            "grid_n": n,
            "k_max": args.k_max,
            "outputs": ",".join(curve_files + [ratios_path.name]),
        },
    )
    return EXIT_OK


def cmd_sweep(args, out_dir: Path) -> int:
    """Run a one-parameter rate sweep and write residuals plus a summary."""
    params, cfg, options = _load_run_config(args)
    window = (int(options["rate_k_lo"]), int(options["rate_k_hi"]))
    spec = SweepSpec(
        parameter=args.parameter,
        values=tuple(args.values),
        base=params,
        coupling=cfg,
        n_substeps=options["n_substeps"],
        linearized=options["linearized"],
        spin_up_time=float(options["spin_up_time"]),
        rate_window=window,
    )
    result = run_sweep(spec, jobs=args.jobs)
    trace_files = []
    for run in result.runs:
        path = out_dir / f"sweep_residuals_{args.parameter}_{run.value:g}.csv"
        run.trace.to_csv(path)
        trace_files.append(path.name)
    summary_path = out_dir / "sweep_summary.csv"
    with open(summary_path, "w", newline="") as stream:
        writer = csv.writer(stream)
        writer.writerow(["value", "omega", "alpha_m", "alpha_d", "rate", "converged"])
        for run in result.runs:
            writer.writerow(
                [
                    _fmt(run.value),
                    _fmt(run.groups.omega),
                    _fmt(run.groups.alpha_m),
                    _fmt(run.groups.alpha_d),
                    _fmt(run.rate),
                    run.converged,
                ]
            )
    _write_manifest(
        out_dir,
        "sweep",
        {
            "command": "sweep",
            "version": __version__,
            "parameter": args.parameter,
            "values": ",".join(f"{v:g}" for v in args.values),
            "rate_k_lo": window[0],
            "rate_k_hi": window[1],
            "spin_up_time": _fmt(options["spin_up_time"]),
            "n_substeps": options["n_substeps"],
            "linearized": int(options["linearized"]),
            "statuses": ",".join(run.status for run in result.runs),
            "outputs": ",".join(trace_files + [summary_path.name]),
        },
    )
    return EXIT_OK


def cmd_piston(args, out_dir: Path) -> int:
    """Run transient piston simulations and export trajectories.

    Mode ``both`` additionally records the maximum displacement deviation
    between the partitioned and monolithic runs at the coupling-step times,
    relative to the peak monolithic displacement.
    """
    params, cfg, options = _load_run_config(args)
    n_sub = options["n_substeps"]
    linearized = options["linearized"]
    dt_inner = params.tau / n_sub
    manifest = {
        "command": "piston",
        "version": __version__,
        "mode": args.mode,
        "t_fin": _fmt(args.t_fin),
        "n_substeps": n_sub,
        "linearized": int(linearized),
    }
    outputs = []
    mono = None
    if args.mode in ("monolithic", "both"):
        mono = piston.solve_monolithic(
            params, args.t_fin, dt_inner, linearized=linearized
        )
        path = out_dir / "trajectory_monolithic.csv"
        mono.to_csv(path)
        outputs.append(path.name)
    if args.mode in ("partitioned", "both"):
        try:
            part, traces = coupling.run_transient(
                params, cfg, args.t_fin, n_substeps=n_sub, linearized=linearized
            )
        except CouplingError as exc:
            trace_path = out_dir / "partitioned_trace.csv"
            exc.trace.to_csv(trace_path)
            manifest["error"] = str(exc)
            manifest["outputs"] = ",".join(outputs + [trace_path.name])
            _write_manifest(out_dir, "piston", manifest)
            print(f"error: {exc}", file=sys.stderr)
            return (
                EXIT_MAX_ITERS
                if isinstance(exc, MaxIterationsExceededError)
                else EXIT_DIVERGED
            )
        path = out_dir / "trajectory_partitioned.csv"
        part.to_csv(path)
        outputs.append(path.name)
        manifest["coupling_iterations_total"] = sum(t.iterations for t in traces)
        if args.mode == "both":
            steps = len(part) - 1
            mono_d = mono.displacements()[:: n_sub][: steps + 1]
            part_d = part.displacements()
            scale = float(np.max(np.abs(mono_d)))
            deviation = float(np.max(np.abs(part_d - mono_d)) / scale)
            manifest["max_rel_displacement_deviation"] = _fmt(deviation)
            print(f"max relative displacement deviation: {deviation:.6e}")
    manifest["outputs"] = ",".join(outputs)
    _write_manifest(out_dir, "piston", manifest)
    return EXIT_OK


def cmd_sensitivity(args, out_dir: Path) -> int:
    """Print the pressure-level shift for the given boundary data."""
    spec = RobinBoundarySpec(
        kappa=args.kappa, kappa_ref=args.kappa_ref, area=args.area, vdot=args.vdot
    )
    shift = pressure_shift(spec)
    print(f"pressure_shift = {shift!r}")
    _write_manifest(
        out_dir,
        "sensitivity",
        {
            "command": "sensitivity",
            "version": __version__,
            "kappa": _fmt(spec.kappa),
            "kappa_ref": _fmt(spec.kappa_ref),
            "area": _fmt(spec.area),
            "vdot": _fmt(spec.vdot),
            "pressure_shift": _fmt(shift),
        },
    )
    return EXIT_OK


_PROFILES = {
    "ones": lambda s: np.ones_like(s),
    "ramp": lambda s: s,
    "s-squared": lambda s: s * s,
}


def cmd_operators(args, out_dir: Path) -> int:
    """Apply one operator or norm to a sampled function."""
    if args.input:
        eps = GridFunction.from_csv(args.input)
        n = eps.n
    else:
        n = args.grid_n
        s = np.linspace(0.0, 1.0, n)
        eps = GridFunction(_PROFILES[args.profile](s))
    cfg = OperatorConfig(omega=args.omega, n=n)
    manifest = {
        "command": "operators",
        "version": __version__,
        "op": args.op,
        "omega": _fmt(args.omega),
        "grid_n": n,
        "input": args.input or f"profile:{args.profile}",
    }
    if args.op in ("apply-ld", "apply-lm"):
        result = apply_ld(cfg, eps) if args.op == "apply-ld" else apply_lm(cfg, eps)
        path = out_dir / f"operator_{args.op}.csv"
        result.to_csv(path)
        manifest["outputs"] = path.name
    else:
        value = h1_norm(eps) if args.op == "h1-norm" else commutator_norm(cfg, eps)
        print(f"{args.op} = {value!r}")
        manifest["result"] = _fmt(value)
    _write_manifest(out_dir, "operators", manifest)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="pistonlab",
        description="Leaky-piston coupling laboratory: operators, solvers, sweeps.",
    )
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--out", default=".", help="output directory (default: cwd)")
    parser.add_argument("--jobs", type=int, default=1, help="sweep worker-pool width")
    parser.add_argument(
        "--seed", type=int, default=None, help="reserved; runs are deterministic"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    fig = sub.add_parser("figure3", help="damping-operator power curves and ratios")
    fig.add_argument("--alpha-d", type=_float_list, default=[2.0, 5.0])
    fig.add_argument("--omega", type=float, default=1.0)
    fig.add_argument("--grid-n", type=int, default=257)
    fig.add_argument("--k-max", type=int, default=10)
    fig.set_defaults(func=cmd_figure3)

    swp = sub.add_parser("sweep", help="one-parameter convergence-rate sweep")
    swp.add_argument(
        "--parameter", required=True, choices=["kappa_f", "tau", "m_s", "rho_f"]
    )
    swp.add_argument("--values", type=_float_list, required=True)
    swp.set_defaults(func=cmd_sweep)

    pst = sub.add_parser("piston", help="transient piston simulation")
    pst.add_argument(
        "--mode", required=True, choices=["monolithic", "partitioned", "both"]
    )
    pst.add_argument("--t-fin", type=float, required=True)
    pst.set_defaults(func=cmd_piston)

    sens = sub.add_parser("sensitivity", help="nearly-closed pressure-level shift")
    sens.add_argument("--kappa", type=float, required=True)
    sens.add_argument("--kappa-ref", type=float, required=True)
    sens.add_argument("--area", type=float, required=True)
    sens.add_argument("--vdot", type=float, required=True)
    sens.set_defaults(func=cmd_sensitivity)

    ops = sub.add_parser("operators", help="apply a grid operator or norm")
    ops.add_argument(
        "--op",
        required=True,
        choices=["apply-ld", "apply-lm", "h1-norm", "commutator"],
    )
    ops.add_argument("--omega", type=float, default=1.0)
    ops.add_argument("--grid-n", type=int, default=257)
    ops.add_argument("--input", help="GridFunction CSV (s,value)")
    ops.add_argument(
        "--profile", choices=sorted(_PROFILES), default="s-squared",
        help="synthesized input when --input is absent",
    )
    ops.set_defaults(func=cmd_operators)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        return args.func(args, out_dir)
    except (ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MaxIterationsExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MAX_ITERS
    except CouplingDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except piston.SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
