import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kinemetrica.stats import RatioMoments, ratio_of_ratios_se


def _data(seed, n=1000):
    rng = np.random.default_rng(seed)
    b = rng.poisson(2.0, n).astype(float) + 1
    a = b * rng.exponential(0.7, n)
    return a, b


def test_batch_moments_match_numpy():
    a, b = _data(0)
    m = RatioMoments()
    m.update(a, b)
    assert m.n == len(a)
    assert m.mean_a == pytest.approx(a.mean()) and m.mean_b == pytest.approx(b.mean())
    assert m.var_a == pytest.approx(a.var(ddof=1)) and m.var_b == pytest.approx(b.var(ddof=1))
    assert m.cov_ab == pytest.approx(np.cov(a, b)[0, 1])


def test_push_equals_batch():
    a, b = _data(1, 300)
    m1, m2 = RatioMoments(), RatioMoments()
    m1.update(a, b)
    for x, y in zip(a, b):
        m2.push(x, y)
    for f in ("mean_a", "mean_b", "m2_a", "m2_b", "c_ab"):
        assert getattr(m2, f) == pytest.approx(getattr(m1, f), rel=1e-12)


def test_delta_method_standard_error():
    a, b = _data(2, 5000)
    m = RatioMoments()
    m.update(a, b)
    r = a.sum() / b.sum()
    # linearised residuals a - r b
    resid = a - r * b
    expected = resid.std(ddof=1) / math.sqrt(len(a)) / b.mean()
    assert m.ratio == pytest.approx(r, rel=1e-13)
    assert m.ratio_se == pytest.approx(expected, rel=1e-10)


def test_constant_denominator_gives_plain_standard_error():
    a = np.random.default_rng(3).normal(2.0, 1.5, 4000)
    m = RatioMoments()
    m.update(a)
    assert m.ratio_se == pytest.approx(a.std(ddof=1) / math.sqrt(len(a)), rel=1e-12)
    assert m.mean_se == pytest.approx(m.ratio_se, rel=1e-12)


def test_empty_and_single():
    m = RatioMoments()
    assert math.isnan(m.ratio) and math.isnan(m.ratio_se)
    m.update([1.0])
    assert math.isnan(m.var_a)
    m.update([])
    assert m.n == 1


@given(st.integers(0, 2**32), st.lists(st.integers(1, 200), min_size=2, max_size=8), st.randoms())
def test_merge_order_does_not_matter(seed, sizes, rnd):
    a, b = _data(seed, sum(sizes))
    parts = []
    start = 0
    for k in sizes:
        m = RatioMoments()
        m.update(a[start:start + k], b[start:start + k])
        parts.append(m)
        start += k
    forward = RatioMoments()
    for p in parts:
        forward.merge_in(p)
    shuffled = parts[:]
    rnd.shuffle(shuffled)
    # pairwise tree reduction in shuffled order
    while len(shuffled) > 1:
        shuffled = [shuffled[i].merged(shuffled[i + 1]) if i + 1 < len(shuffled) else shuffled[i]
                    for i in range(0, len(shuffled), 2)]
    tree = shuffled[0]
    for f in ("mean_a", "mean_b", "m2_a", "m2_b", "c_ab"):
        x, y = getattr(forward, f), getattr(tree, f)
        assert abs(x - y) <= 1e-10 * max(abs(x), 1e-300)
    assert forward.n == tree.n == len(a)


def test_difference_se():
    x, y = RatioMoments(), RatioMoments()
    x.update(*_data(4))
    y.update(*_data(5))
    assert ratio_of_ratios_se(x, y) == pytest.approx(math.hypot(x.ratio_se, y.ratio_se))
