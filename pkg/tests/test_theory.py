import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kinemetrica import bodies as B
from kinemetrica import theory as T
from kinemetrica.errors import RegimeViolation, UsageError


def test_eta_known_values():
    assert T.eta(2).value == pytest.approx(math.pi, rel=1e-14)
    assert T.eta(3).value == pytest.approx(4.0, rel=1e-14)
    assert T.eta(4).value == pytest.approx(1.5 * math.pi, rel=1e-14)
    with pytest.raises(UsageError):
        T.eta(1)


@pytest.mark.parametrize("n", range(2, 11))
def test_eta_two_forms_agree(n):
    assert abs(T.eta(n).value - T.eta_from_sphere_areas(n)) < 1e-12


def test_unit_sphere_area_via_math_gamma():
    for m in range(0, 12):
        direct = 2 * math.pi ** ((m + 1) / 2) / math.gamma((m + 1) / 2)
        assert T.unit_sphere_area(m).value == pytest.approx(direct, rel=1e-13)


@pytest.mark.parametrize(
    "body, value",
    [
        (B.ball(1.0), math.pi / 2),
        (B.ball(1.0, 3), 4 / 3),
        (B.annulus(0.5, 1.0), math.pi / 4),
        (B.box([2.0, 3.0]), math.pi * 6 / 10),
    ],
)
def test_mean_chord(body, value):
    tv = T.mean_chord(body)
    assert tv.value == pytest.approx(value, rel=1e-14)
    assert tv.formula_id == "cauchy_mean_chord"


def test_harmonic_mean_length():
    disk = B.ball(1.0)
    assert T.harmonic_mean_length(2.0, disk).value == pytest.approx(0.879802, abs=1e-6)
    assert T.harmonic_mean_length(math.inf, disk).value == pytest.approx(math.pi / 2)
    assert T.harmonic_mean_length(1e-6, disk).value / 1e-6 == pytest.approx(1.0, abs=1e-5)
    with pytest.raises(UsageError):
        T.harmonic_mean_length(0.0, disk)


@given(st.floats(1e-3, 1e3), st.floats(1.0001, 10.0))
def test_harmonic_increasing_and_bounded(l, factor):
    disk = B.ball(1.0)
    lo = T.harmonic_mean_length(l, disk).value
    hi = T.harmonic_mean_length(l * factor, disk).value
    assert lo < hi < math.pi / 2


def test_small_loop_mean_length():
    disk = B.ball(2.0)
    r = 0.25
    L1, F1 = 2 * math.pi * r, math.pi * r * r
    # by hand: numerator 4 pi^3, denominator (8 + 1/8 + 2) pi^2
    assert T.small_loop_mean_length(L1, F1, disk).value == pytest.approx(4 * math.pi / 10.125, rel=1e-14)
    tiny = 1e-7
    ratio = T.small_loop_mean_length(2 * math.pi * tiny, math.pi * tiny**2, disk).value / (2 * math.pi * tiny)
    assert ratio == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(UsageError):
        T.small_loop_mean_length(L1, 0.0, disk)


def test_inclusion_2d():
    disk = B.ball(2.0)
    assert T.inclusion_probability_2d(disk, 2 * math.pi, math.pi).value == pytest.approx(1 / 9, rel=1e-14)
    assert T.circle_inclusion_2d(2.0, 1.0) == pytest.approx(1 / 9)
    assert T.inclusion_probability_2d(disk, 4 * math.pi, 4 * math.pi).value == pytest.approx(0.0, abs=1e-15)
    eps = 1e-9
    assert T.inclusion_probability_2d(disk, 2 * math.pi * eps, math.pi * eps**2).value == pytest.approx(1.0)
    # long thin loop: the raw value goes negative
    with pytest.raises(RegimeViolation):
        T.inclusion_probability_2d(disk, 10.0, 0.1)


def test_inclusion_3d():
    s0, s1 = T.sphere_measures(2.0), T.sphere_measures(1.0)
    assert T.inclusion_probability_3d(*s0, *s1).value == pytest.approx(1 / 27, rel=1e-13)
    assert T.inclusion_probability_3d(*s0, *s0).value == pytest.approx(0.0, abs=1e-15)
    assert T.inclusion_probability_3d(*s0, *T.sphere_measures(1e-3)).value > 0.995


@given(st.floats(0.1, 10.0), st.floats(0.01, 0.99))
def test_sphere_inclusion_is_cube_ratio(R0, frac):
    R1 = R0 * frac
    p = T.inclusion_probability_3d(*T.sphere_measures(R0), *T.sphere_measures(R1)).value
    assert p == pytest.approx(T.sphere_inclusion_3d(R0, R1), rel=1e-10, abs=1e-15)
    assert T.can_contain_3d(*T.sphere_measures(R0), *T.sphere_measures(R1)) == (p > 0)


def test_mean_arc():
    assert T.mean_arc(math.pi / 2, math.pi / 16, 4 * math.pi).value == pytest.approx(0.7363107781851077)
    assert T.mean_arc(3.0, 0.0, 1.0).value == pytest.approx(1.5)


def test_mean_chi_for_two_circles():
    disk = B.ball(2.0)
    assert T.mean_chi_loop(2 * math.pi, math.pi, disk).value == pytest.approx(8 / 9)
    L1 = 2 * math.pi * 1e-8
    assert T.mean_chi_loop(L1, math.pi * 1e-16, disk).value < 1e-7


loop_bodies = st.sampled_from([B.ball(2.0), B.ball(5.0), B.annulus(1.0, 3.0)])


@given(loop_bodies, st.floats(0.01, 0.99))
def test_loop_identities(body, frac):
    r = frac * body.min_curvature_radius
    L1, F1 = 2 * math.pi * r, math.pi * r * r
    try:
        p = T.inclusion_probability_2d(body, L1, F1).value
    except RegimeViolation:
        return
    s = T.mean_arc(L1, F1, body.surface).value
    assert abs(T.mean_chi_loop(L1, F1, body).value - (1 - p)) < 1e-12
    assert abs(T.small_loop_mean_length(L1, F1, body).value - (p * L1 + (1 - p) * s)) < 1e-12
    open_loop = T.mean_chi_open_loop(L1, F1, body).value
    assert abs(open_loop - (1 + (1 - p) * s / L1)) < 1e-12


def test_ocd():
    ring = B.annulus(0.5, 1.0)
    assert T.ocd_mean_chord(ring).value == pytest.approx(3 * math.pi / 8)
    assert T.ocd_mean_chord(ring).value / T.mean_chord(ring).value == pytest.approx(1.5)
    for body in (B.ball(1.0), B.box([2, 3]), B.ball(1.0, 3)):
        assert T.ocd_mean_chord(body).value == pytest.approx(T.mean_chord(body).value)


def test_formula_ids_are_listed():
    disk = B.ball(2.0)
    values = [
        T.mean_chord(disk), T.harmonic_mean_length(1.0, disk), T.big_loop_mean_length(disk),
        T.small_loop_mean_length(1.0, 0.05, disk), T.inclusion_probability_2d(disk, 1.0, 0.05),
        T.inclusion_probability_3d(*T.sphere_measures(2), *T.sphere_measures(1)), T.mean_arc(1, 0.05, 4),
        T.mean_chi_loop(1.0, 0.05, disk), T.mean_chi_open_loop(1.0, 0.05, disk), T.ocd_mean_chord(disk),
        T.eta(3), T.unit_sphere_area(2),
    ]
    assert {v.formula_id for v in values} == set(T.FORMULAS)
    assert all(math.isfinite(v.value) for v in values)
