import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kinemetrica import curves as C
from kinemetrica.errors import CapabilityError, UsageError

LAWS = [
    C.StepLengthLaw.constant(0.3),
    C.StepLengthLaw.exponential(0.2),
    C.StepLengthLaw.gamma(2.0, 0.1),
    C.StepLengthLaw.pareto(0.1, 2.5),
]


@pytest.mark.parametrize("law, mean", list(zip(LAWS, [0.3, 0.2, 0.2, 2.5 * 0.1 / 1.5])))
def test_law_means(law, mean):
    assert law.mean == pytest.approx(mean)
    x = law.sample(np.random.default_rng(0), 200_000)
    se = x.std() / math.sqrt(len(x))
    assert abs(x.mean() - mean) < 5 * se + 1e-12


def test_heavy_tail_mean_is_infinite():
    assert math.isinf(C.StepLengthLaw.pareto(1.0, 0.8).mean)


def test_law_validation_and_round_trip():
    with pytest.raises(UsageError):
        C.StepLengthLaw.exponential(-1.0)
    with pytest.raises(UsageError):
        C.StepLengthLaw("cauchy", (1.0,))
    for law in LAWS:
        assert C.StepLengthLaw.from_descriptor(law.to_descriptor()) == law


def test_segment():
    seg = C.make_segment(3.0, 3)
    assert seg.total_length == pytest.approx(3.0)
    assert seg.circumradius == pytest.approx(1.5)
    assert seg.topology == "fiber"
    np.testing.assert_allclose(C.arc_point(seg, 1.5), 0.0, atol=1e-15)


def test_closed_polyline():
    sq = C.make_polyline([[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]], closed=True)
    assert sq.total_length == pytest.approx(4.0)
    assert sq.topology == "loop" and sq.n_edges == 4
    with pytest.raises(UsageError):
        C.make_polyline([[0, 0], [1, 0], [1, 1]], closed=True)


def test_circle_loop():
    c = C.make_circle_loop(0.25)
    assert c.total_length == pytest.approx(math.pi / 2)
    assert c.disk_area == pytest.approx(math.pi / 16)
    np.testing.assert_allclose(C.arc_point(c, math.pi / 8), [0.0, 0.25], atol=1e-15)
    with pytest.raises(CapabilityError):
        C.make_segment(1.0).disk_area


def test_line_has_infinite_length():
    line = C.make_line(3)
    assert math.isinf(line.total_length)
    with pytest.raises(CapabilityError):
        C.arc_point(line, 0.0)


@given(st.sampled_from(LAWS), st.floats(0.05, 30.0), st.integers(2, 4), st.integers(0, 2**32))
def test_walk_has_exact_length_and_centered_midpoint(law, target, dim, seed):
    walk = C.make_pearson_walk(np.random.default_rng(seed), law, target, dim)
    assert walk.total_length == pytest.approx(target, rel=1e-10)
    np.testing.assert_allclose(C.arc_point(walk, walk.total_length / 2), 0.0, atol=1e-9 * max(1.0, target))
    assert walk.circumradius <= target / 2 + 1e-9


def test_walk_steps_are_isotropic():
    rng = np.random.default_rng(3)
    walk = C.make_pearson_walk(rng, C.StepLengthLaw.constant(1.0), 20_000.0, 2)
    d = np.diff(walk.vertices, axis=0)
    ang = np.arctan2(d[:, 1], d[:, 0])
    # first two circular moments vanish for an isotropic law
    for k in (1, 2):
        assert abs(np.cos(k * ang).mean()) < 5 / math.sqrt(len(ang))
        assert abs(np.sin(k * ang).mean()) < 5 / math.sqrt(len(ang))


@given(st.integers(1, 12), st.integers(2, 3), st.integers(0, 2**32))
def test_tree_structure(branches, dim, seed):
    rng = np.random.default_rng(seed)
    tree = C.make_ramified_tree(rng, branches, C.StepLengthLaw.exponential(1.0), dim)
    assert tree.topology == "tree"
    assert tree.n_edges == tree.n_vertices - 1  # connected and acyclic
    assert tree.n_edges == 2 * branches - 1  # each extra branch splits one edge
    # every vertex reachable through the emitted edges
    seen = {int(tree.edges[0, 0])}
    for a, b in tree.edges:
        assert a in seen
        seen.add(int(b))
    assert len(seen) == tree.n_vertices


def test_tree_total_length_is_sum_of_branches():
    rng = np.random.default_rng(5)
    law = C.StepLengthLaw.gamma(2.0, 0.5)
    tree = C.make_ramified_tree(rng, 6, law, 2)
    expected = law.sample(np.random.default_rng(5), 6).sum()
    assert tree.total_length == pytest.approx(expected)


def test_process_descriptors_round_trip():
    procs = [
        C.segment_process(2.0),
        C.segment_process(C.StepLengthLaw.exponential(2.0)),
        C.pearson_process(C.StepLengthLaw.gamma(2, 0.1), 50.0, 3),
        C.tree_process(5, C.StepLengthLaw.exponential(1.0)),
        C.circle_process(3.0),
        C.line_process(3),
    ]
    for p in procs:
        assert C.CurveProcess.from_descriptor(p.to_descriptor()) == p


def test_process_properties():
    assert C.segment_process(2.0).deterministic
    assert not C.segment_process(C.StepLengthLaw.exponential(2.0)).deterministic
    assert C.tree_process(5, C.StepLengthLaw.exponential(1.0)).mean_length == pytest.approx(5.0)
    assert C.circle_process(3.0).mean_length == pytest.approx(6 * math.pi)
    assert math.isinf(C.line_process().mean_length)
    with pytest.raises(UsageError):
        C.CurveProcess("spiral")
    with pytest.raises(UsageError):
        C.CurveProcess("pearson", length=5.0)


def test_scaled_curve():
    walk = C.make_pearson_walk(np.random.default_rng(1), LAWS[1], 4.0)
    big = walk.scaled(3.0)
    assert big.total_length == pytest.approx(12.0)
    assert big.circumradius == pytest.approx(3 * walk.circumradius)
