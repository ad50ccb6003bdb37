import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from irappendage.core_types import (
    IngestionError,
    InvalidParameterError,
    MotorModel,
    Stroke,
    TaskSpec,
    convert_units,
    domain_ok,
    from_si,
    tail_dimensionless,
    to_si,
    torque_bounds,
    validate_tail_domain,
)

from conftest import make_tail, make_template

UNITS = ["kg", "g", "m", "cm", "mm", "rad", "deg", "rad/s", "RPM", "Hz", "kg*m^2", "W", "s", "%"]


def test_rpm_and_degree_conversion():
    assert to_si(356, "RPM") == pytest.approx(37.28, abs=0.005)
    assert to_si(172.5, "deg") == pytest.approx(3.0107, abs=5e-5)


@given(st.sampled_from(UNITS), st.floats(-1e6, 1e6, allow_nan=False))
def test_unit_round_trip(unit, value):
    assert from_si(to_si(value, unit), unit) == pytest.approx(value, rel=1e-12, abs=1e-300)


def test_convert_units_lists_and_passthrough():
    out = convert_units({"a": {"value": [1, 2], "unit": "cm"}, "b": "note", "c": {"value": 5, "unit": "g"}})
    assert out["a"] == pytest.approx([0.01, 0.02])
    assert out["b"] == "note"
    assert out["c"] == pytest.approx(0.005)


def test_unknown_unit_rejected():
    with pytest.raises(IngestionError, match="furlong"):
        convert_units({"x": {"value": 1, "unit": "furlong"}})


def test_stroke_unbounded_has_no_value():
    s = Stroke.unbounded()
    assert s.is_unbounded and s.angle is None
    assert s.body_limit(0.3) == math.inf
    assert Stroke.bounded(2.0).body_limit(0.25) == 0.5


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
def test_invalid_stroke(bad):
    with pytest.raises(InvalidParameterError):
        Stroke.bounded(bad)


def test_invalid_motor_and_task():
    with pytest.raises(InvalidParameterError):
        MotorModel(-1.0, 1.0)
    with pytest.raises(InvalidParameterError):
        MotorModel(1.0, 1.0, 1.5)
    with pytest.raises(InvalidParameterError):
        TaskSpec(1.0, 0.0)
    with pytest.raises(InvalidParameterError):
        make_template(xi=1.2)
    with pytest.raises(InvalidParameterError):
        make_template(I_d=0.0)


def test_stall_torque():
    assert MotorModel(10.0, 20.0).stall_torque == 2.0


def test_torque_bounds_quadrants():
    assert torque_bounds(0.0, 1.0) == (-1.0, 1.0)
    # moving backwards: driving torque loses back-EMF headroom, braking does not
    lo, hi = torque_bounds(-0.25, 1.0)
    assert hi == pytest.approx(0.75) and lo == -1.0
    lo, hi = torque_bounds(0.5, 0.4)
    assert hi == 0.4 and lo == -0.4
    lo, hi = torque_bounds(0.9, 1.0)
    assert lo == pytest.approx(-0.1)


def test_tail_dimensionless_hand_values():
    p = make_tail(m_b=1.0, m_t=1.0, I_b=0.0, I_t=0.0, l_b=1.0, l_t=1.0)
    xi, eta = tail_dimensionless(p)
    assert xi == pytest.approx(0.5)
    assert eta == pytest.approx(1.0)


def test_zero_body_offset_zeroes_eta():
    xi, eta = tail_dimensionless(make_tail(l_b=0.0))
    assert eta == 0.0
    assert validate_tail_domain(make_tail(l_b=0.0)).valid


def test_domain_edges():
    assert domain_ok(1.0, 0.0)
    assert not domain_ok(1.0, 0.1)
    assert not domain_ok(0.0, 0.0)
    xi = 0.3
    bound = math.sqrt((1 - xi) / xi)
    assert domain_ok(xi, 0.95 * min(bound, 0.5 / xi))
    assert not domain_ok(xi, 1.05 * bound)


@given(st.floats(0.1, 10), st.floats(0.01, 5), st.floats(1e-4, 1), st.floats(1e-4, 1),
       st.floats(0, 1), st.floats(0, 1))
def test_physical_tails_stay_in_domain(m_b, m_t, I_b, I_t, l_b, l_t):
    # positive inertias keep every real tail strictly inside both eta bounds
    v = validate_tail_domain(make_tail(m_b=m_b, m_t=m_t, I_b=I_b, I_t=I_t, l_b=l_b, l_t=l_t))
    assert v.valid, v.reason


@given(st.floats(0.05, 0.95), st.floats(0.0, 3.0))
def test_domain_matches_brute_force(xi, eta):
    # well posed iff the mass matrix determinant stays positive for every joint angle
    det_min = min((1 / xi - 2 * eta * c) - (1 - eta * c) ** 2
                  for c in (math.cos(k * math.pi / 180) for k in range(0, 361)))
    denom_min = min(1 - 2 * xi * eta * c for c in (-1.0, 1.0))
    expected = det_min > 1e-12 and denom_min > 1e-12
    # skip the measure-zero neighbourhood of the boundary
    margin = min(abs(det_min), abs(denom_min))
    if margin > 1e-6:
        assert domain_ok(xi, eta) == expected
