import math

import pytest

from pistonlab import (
    DimensionlessGroups,
    PistonParams,
    ValidationError,
    nondimensionalize,
    params_from_config,
    parse_config,
)


def make_params(**overrides):
    base = dict(rho_f=1.0, ell0=1.0, u0=0.0, m_s=1.0, kappa_s=1.0, kappa_f=1.0, tau=0.1)
    base.update(overrides)
    return PistonParams(**base)


class TestNondimensionalize:
    def test_all_couplings_off(self):
        p = make_params(rho_f=0.0, ell0=1.0, m_s=1.0, kappa_s=0.0, kappa_f=0.0, tau=1.0)
        g = nondimensionalize(p)
        assert (g.omega, g.alpha_m, g.alpha_d) == (0.0, 0.0, 0.0)

    def test_tc1_like_magnitudes(self):
        p = make_params(rho_f=1.1, ell0=1.0, m_s=1000.0, kappa_s=0.0, kappa_f=5000.0, tau=0.005)
        g = nondimensionalize(p)
        assert g.omega == 0.0
        assert g.alpha_m == pytest.approx(0.0011, rel=1e-12)
        assert g.alpha_d == pytest.approx(0.025, rel=1e-12)

    def test_hand_arithmetic(self):
        p = make_params(rho_f=2.0, ell0=3.0, m_s=4.0, kappa_s=4.0, kappa_f=8.0, tau=0.5)
        g = nondimensionalize(p)
        assert (g.omega, g.alpha_m, g.alpha_d) == (0.5, 1.5, 1.0)

    @pytest.mark.parametrize("c", [2.0, 0.5, 3.7, 1e6])
    def test_joint_scaling_invariance(self, c):
        p = make_params(rho_f=1.2, ell0=0.8, m_s=3.0, kappa_s=5.0, kappa_f=7.0, tau=0.25)
        scaled = make_params(
            rho_f=1.2 * c, ell0=0.8, m_s=3.0 * c, kappa_s=5.0 * c, kappa_f=7.0 * c, tau=0.25
        )
        g, gs = nondimensionalize(p), nondimensionalize(scaled)
        assert gs.omega == pytest.approx(g.omega, rel=1e-12)
        assert gs.alpha_m == pytest.approx(g.alpha_m, rel=1e-12)
        assert gs.alpha_d == pytest.approx(g.alpha_d, rel=1e-12)

    def test_alpha_d_exact_ratios(self):
        p = make_params(kappa_f=3.0, tau=0.125, m_s=2.0)
        base = nondimensionalize(p).alpha_d
        assert nondimensionalize(make_params(kappa_f=3.0, tau=0.25, m_s=2.0)).alpha_d == 2 * base
        assert nondimensionalize(make_params(kappa_f=6.0, tau=0.125, m_s=2.0)).alpha_d == 2 * base
        assert nondimensionalize(make_params(kappa_f=3.0, tau=0.125, m_s=4.0)).alpha_d == base / 2

    def test_alpha_m_independent_of_tau(self):
        a = nondimensionalize(make_params(tau=0.1)).alpha_m
        b = nondimensionalize(make_params(tau=0.0125)).alpha_m
        assert a == b


class TestValidation:
    @pytest.mark.parametrize(
        "field,value",
        [
            ("rho_f", -1.0),
            ("ell0", 0.0),
            ("ell0", -2.0),
            ("m_s", 0.0),
            ("kappa_s", -0.5),
            ("kappa_f", -1e-9),
            ("tau", 0.0),
            ("u0", math.nan),
            ("m_s", math.inf),
        ],
    )
    def test_rejects_and_names_field(self, field, value):
        with pytest.raises(ValidationError, match=field):
            make_params(**{field: value})

    def test_groups_reject_negative(self):
        with pytest.raises(ValidationError, match="alpha_d"):
            DimensionlessGroups(omega=0.0, alpha_m=0.0, alpha_d=-1.0)

    def test_params_immutable(self):
        p = make_params()
        with pytest.raises(Exception):
            p.tau = 0.5


class TestConfigParsing:
    def test_roundtrip_with_comments(self):
        text = """
        # piston setup
        rho_f = 1.1
        ell0 = 1.0   # column length
        u0 = 0.0
        m_s = 1000
        kappa_s = 0.0
        kappa_f = 5e3
        tau = 5e-3
        """
        params = params_from_config(parse_config(text))
        assert params.kappa_f == 5000.0
        assert params.tau == 0.005

    def test_unknown_key_rejected(self):
        with pytest.raises(ValidationError, match="unknown key"):
            parse_config("bogus = 1\n", known_keys=("rho_f",))

    def test_duplicate_key_rejected(self):
        with pytest.raises(ValidationError, match="duplicate"):
            parse_config("rho_f = 1\nrho_f = 2\n")

    def test_malformed_line_rejected(self):
        with pytest.raises(ValidationError, match="name = value"):
            parse_config("rho_f 1.0\n")

    def test_non_numeric_value_rejected(self):
        with pytest.raises(ValidationError, match="not a number"):
            parse_config("rho_f = fast\n")

    def test_missing_parameter_reported(self):
        with pytest.raises(ValidationError, match="tau"):
            params_from_config(parse_config("rho_f = 1\n"))
