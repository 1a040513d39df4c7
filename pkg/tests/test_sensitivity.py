import pytest

from pistonlab import RobinBoundarySpec, ValidationError, pressure_shift


class TestPressureShift:
    def test_zero_volume_rate(self):
        spec = RobinBoundarySpec(kappa=1e6, kappa_ref=10.0, area=0.5, vdot=0.0)
        assert pressure_shift(spec) == 0.0

    def test_reference_resistance(self):
        spec = RobinBoundarySpec(kappa=123.0, kappa_ref=123.0, area=0.5, vdot=0.7)
        assert pressure_shift(spec) == 0.0

    def test_hand_value(self):
        spec = RobinBoundarySpec(kappa=1500.0, kappa_ref=500.0, area=0.2, vdot=0.01)
        assert pressure_shift(spec) == -50.0

    def test_linearity_exact(self):
        spec = RobinBoundarySpec(kappa=1500.0, kappa_ref=500.0, area=0.2, vdot=0.01)
        doubled_vdot = RobinBoundarySpec(kappa=1500.0, kappa_ref=500.0, area=0.2, vdot=0.02)
        doubled_gap = RobinBoundarySpec(kappa=2500.0, kappa_ref=500.0, area=0.2, vdot=0.01)
        assert pressure_shift(doubled_vdot) == 2.0 * pressure_shift(spec)
        assert pressure_shift(doubled_gap) == 2.0 * pressure_shift(spec)

    def test_sign(self):
        spec = RobinBoundarySpec(kappa=2000.0, kappa_ref=100.0, area=1.0, vdot=0.5)
        assert pressure_shift(spec) < 0.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(kappa=-1.0, kappa_ref=0.0, area=1.0, vdot=0.0),
            dict(kappa=1.0, kappa_ref=-2.0, area=1.0, vdot=0.0),
            dict(kappa=1.0, kappa_ref=0.0, area=0.0, vdot=0.0),
            dict(kappa=1.0, kappa_ref=0.0, area=1.0, vdot=float("nan")),
        ],
    )
    def test_invalid_spec(self, kwargs):
        with pytest.raises(ValidationError):
            RobinBoundarySpec(**kwargs)
