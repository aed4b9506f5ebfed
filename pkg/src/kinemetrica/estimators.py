"""Monte Carlo estimators of the quantities in :mod:`kinemetrica.theory`.

Work is split into chunks.  Chunk ``i`` draws from its own stream,
``SeedSequence(seed, spawn_key=(i,))``, and stops once it has collected its
share of hitting samples.  Chunks are reduced in index order, so the result
depends only on (seed, n_samples, chunk_size) and not on the worker count.

Units of the ratio estimators:

* fixed curve (segment, circle, line): one unit per hitting motion;
* random curve: one unit per drawn curve, summing over its candidate
  motions and weighted by that curve's window measure, so curves enter in
  proportion to their hitting measure as the double average requires.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable

import numpy as np

from . import theory
from .bodies import Body
from .curves import CurveProcess, StepLengthLaw, pearson_process, segment_process, tree_process
from .errors import ConfigurationError, DegenerateEstimate, RegimeViolation, UsageError
from .kinematics import MAX_REJECTIONS, Tally, draw_candidates, haar_rotations, tally, window_measure
from .stats import RatioMoments

DEFAULT_CHUNK = 65_536
DEFAULT_MOTIONS_PER_CURVE = 32
DEFAULT_TRUNCATION = 1000.0
# long walks cost far more to build than to place, so each is reused more
INFINITE_MOTIONS_PER_CURVE = 512


@dataclass
class EstimatorResult:
    name: str
    estimate: float
    std_error: float
    n_samples: int
    n_accepted: int
    theory: theory.TheoryValue | None = None
    z_score: float | None = None
    wall_time: float = 0.0
    extra: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_moments(cls, name, mom: RatioMoments, n_samples, n_accepted, theory_value=None, wall_time=0.0, **extra):
        if mom.n == 0 or mom.mean_b == 0:
            raise DegenerateEstimate(f"{name}: no accepted denominator mass (zero pieces)")
        est, se = mom.ratio, mom.ratio_se
        z = None
        if theory_value is not None and se > 0:
            z = (est - theory_value.value) / se
        return cls(name, est, se, n_samples, n_accepted, theory_value, z, wall_time, dict(extra))

    def within(self, tol_sigma: float, slack: float = 0.0) -> bool:
        """|estimate - theory| <= tol_sigma * SE + slack."""
        if self.theory is None:
            return True
        return abs(self.estimate - self.theory.value) <= tol_sigma * self.std_error + slack


# ---------------------------------------------------------------- chunk machinery


def root_seed(rng) -> int:
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 2**63 - 1))
    if rng is None:
        raise UsageError("a seed or Generator is required")
    return int(rng)


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def default_workers() -> int:
    return max(1, int(os.environ.get("KINEMETRICA_WORKERS", "1")))


@dataclass
class ChunkOutput:
    moments: dict[str, RatioMoments]
    accepted: int
    candidates: int


Observer = Callable[[Tally], dict[str, tuple[np.ndarray, np.ndarray]]]


def _sample_chunk(body: Body, process: CurveProcess, observer: Observer, seed: int, motions_per_curve: int,
                  index: int, target: int) -> ChunkOutput:
    rng = chunk_rng(seed, index)
    moments: dict[str, RatioMoments] = {}
    accepted = candidates = 0

    def fold(obs, hit, weight=None):
        for name, (a, b) in obs.items():
            mom = moments.setdefault(name, RatioMoments())
            if weight is None:
                mom.update(a[hit], b[hit])
            else:
                mom.push(weight * float(a[hit].sum()), weight * float(b[hit].sum()))

    if process.deterministic:
        curve = process.draw(rng)
        size = 4096
        while accepted < target:
            rots, trans = draw_candidates(rng, body, curve, size)
            t = tally(body, curve, rots, trans)
            hit = t.hit
            nh = int(hit.sum())
            fold(observer(t), hit)
            accepted += nh
            candidates += size
            if accepted == 0 and candidates >= MAX_REJECTIONS:
                raise ConfigurationError("no hitting motion in 1e7 candidates; check body/curve scales")
            rate = max(accepted / candidates, 1e-4)
            size = int(min(max((target - accepted) / rate * 1.05, 1024), 131_072))
    else:
        while accepted < target:
            curve = process.draw(rng)
            w = window_measure(body, curve)
            rots, trans = draw_candidates(rng, body, curve, motions_per_curve)
            t = tally(body, curve, rots, trans)
            hit = t.hit
            fold(observer(t), hit, weight=w)
            accepted += int(hit.sum())
            candidates += motions_per_curve
            if accepted == 0 and candidates >= MAX_REJECTIONS:
                raise ConfigurationError("no hitting motion in 1e7 candidates; check body/curve scales")
    return ChunkOutput(moments, accepted, candidates)


def run_chunks(fn: Callable[[int, int], ChunkOutput], n_samples: int, chunk_size: int | None = None,
               workers: int | None = None) -> ChunkOutput:
    """Run ``fn(index, target)`` over all chunks and reduce in index order."""
    chunk_size = chunk_size or DEFAULT_CHUNK
    workers = workers or default_workers()
    n_chunks = max(1, math.ceil(n_samples / chunk_size))
    targets = [min(chunk_size, n_samples - i * chunk_size) for i in range(n_chunks)]
    if workers > 1 and n_chunks > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(fn, range(n_chunks), targets))
    else:
        outs = [fn(i, t) for i, t in enumerate(targets)]
    total: dict[str, RatioMoments] = {}
    acc = cand = 0
    for out in outs:
        for name, mom in out.moments.items():
            total.setdefault(name, RatioMoments()).merge_in(mom)
        acc += out.accepted
        cand += out.candidates
    return ChunkOutput(total, acc, cand)


def _run(body, process, observer, rng, n_samples, motions_per_curve, chunk_size, workers):
    if body.dimension != process.dimension:
        raise UsageError("body and process dimensions must match")
    seed = root_seed(rng)
    fn = partial(_sample_chunk, body, process, observer, seed, motions_per_curve or DEFAULT_MOTIONS_PER_CURVE)
    return run_chunks(fn, n_samples, chunk_size, workers)


# ---------------------------------------------------------------- observers
# module-level so they pickle into worker processes


def _obs_mean_length(t: Tally):
    return {"mean_length": (t.inside_length, t.chi.astype(float))}


def _obs_crossings(t: Tally):
    return {"mean_length": (t.inside_length, 0.5 * t.crossings)}


def _obs_chords(t: Tally):
    one = np.ones(len(t))
    half = 0.5 * t.crossings
    return {"ocd": (t.inside_length, one), "mcd": (t.inside_length, half), "ocd_over_mcd": (half, one)}


def _obs_small_loop(L1: float, t: Tally):
    one = np.ones(len(t))
    crossing = (t.crossings > 0).astype(float)
    return {
        "mean_length": (t.inside_length, one),
        "inclusion_p": (t.fully_inside.astype(float), one),
        "mean_arc": (t.inside_length * crossing, crossing),
        "mean_chi": (t.chi.astype(float), one),
        # removed point uniform on the loop: splits the inside arc with probability L / L1
        "mean_chi_open_loop": (1.0 + crossing * t.inside_length / L1, one),
    }


# ---------------------------------------------------------------- estimators


def _theory_for_process(body: Body, process: CurveProcess) -> theory.TheoryValue:
    if process.kind == "circle":
        if process.radius > body.max_curvature_radius:
            return theory.big_loop_mean_length(body)
        # chi-weighted ratio gives the Cauchy value for every circle loop
        return theory.mean_chord(body)
    return theory.harmonic_mean_length(process.mean_length, body)


def estimate_mean_traversed_length(rng, body: Body, process: CurveProcess, n_samples: int, convention: str = "MCD",
                                   *, motions_per_curve=None, chunk_size=None, workers=None) -> EstimatorResult:
    """Ratio estimator sum(inside length) / sum(piece count) over hitting samples."""
    if convention != "MCD":
        raise UsageError("mean traversed length uses the multiple-chord convention; use estimate_ocd_mean_chord for OCD")
    if n_samples < 1000:
        raise UsageError("n_samples must be >= 1000")
    t0 = time.perf_counter()
    out = _run(body, process, _obs_mean_length, rng, n_samples, motions_per_curve, chunk_size, workers)
    return EstimatorResult.from_moments(
        "mean_length", out.moments["mean_length"], out.candidates, out.accepted,
        _theory_for_process(body, process), time.perf_counter() - t0,
    )


def check_small_loop_regime(body: Body, loop_radius: float) -> None:
    if body.dimension != 2 or not body.is_smooth:
        raise RegimeViolation("small-loop formulas need a smooth 2D body (disk or annulus)")
    if not loop_radius < body.min_curvature_radius:
        raise RegimeViolation(
            f"loop radius {loop_radius} is not below the body's minimum curvature radius {body.min_curvature_radius}"
        )


def estimate_small_loop_quantities(rng, body: Body, loop: CurveProcess | float, n_samples: int,
                                   *, chunk_size=None, workers=None) -> dict[str, EstimatorResult]:
    """Mean length, inclusion probability, mean arc and mean Euler characteristics from one stream."""
    if not isinstance(loop, CurveProcess):
        loop = CurveProcess("circle", 2, radius=float(loop))
    if loop.kind != "circle":
        raise UsageError("small-loop estimates need a circle loop process")
    check_small_loop_regime(body, loop.radius)
    t0 = time.perf_counter()
    L1 = 2 * math.pi * loop.radius
    F1 = math.pi * loop.radius**2
    out = _run(body, loop, partial(_obs_small_loop, L1), rng, n_samples, None, chunk_size, workers)
    wall = time.perf_counter() - t0
    oracle = {
        "mean_length": theory.small_loop_mean_length(L1, F1, body),
        "inclusion_p": theory.inclusion_probability_2d(body, L1, F1),
        "mean_arc": theory.mean_arc(L1, F1, body.surface),
        "mean_chi": theory.mean_chi_loop(L1, F1, body),
        "mean_chi_open_loop": theory.mean_chi_open_loop(L1, F1, body),
    }
    return {
        name: EstimatorResult.from_moments(name, out.moments[name], out.candidates, out.accepted, oracle[name], wall)
        for name in oracle
    }


def small_loop_identities(results: dict[str, EstimatorResult], L1: float) -> dict[str, tuple[float, float]]:
    """(discrepancy, combined SE) for <chi> = 1 - p and <L> = p L1 + (1 - p) <s>."""
    p = results["inclusion_p"]
    chi = results["mean_chi"]
    L = results["mean_length"]
    s = results["mean_arc"]
    d_chi = chi.estimate - (1.0 - p.estimate)
    se_chi = math.hypot(chi.std_error, p.std_error)
    pred = p.estimate * L1 + (1 - p.estimate) * s.estimate
    d_len = L.estimate - pred
    se_len = math.sqrt(L.std_error**2 + ((L1 - s.estimate) * p.std_error) ** 2 + ((1 - p.estimate) * s.std_error) ** 2)
    return {"chi_equals_one_minus_p": (d_chi, se_chi), "length_decomposition": (d_len, se_len)}


def _inclusion_3d_chunk(R0: float, R1: float, seed: int, index: int, target: int) -> ChunkOutput:
    rng = chunk_rng(seed, index)
    mom = RatioMoments()
    accepted = candidates = 0
    reach = R0 + R1
    while accepted < target:
        size = int(min(max(1.3 * (target - accepted), 1024), 262_144))
        trans = rng.uniform(-reach, reach, (size, 3))
        # spheres are rotation invariant; the rotation is drawn to keep the
        # stream aligned with the full kinematic density but does not act
        haar_rotations(rng, 3, size)
        dist = np.linalg.norm(trans, axis=1)
        hit = (dist <= R0 + R1) & (dist >= R1 - R0)
        inside = (dist + R1 <= R0).astype(float)
        mom.update(inside[hit])
        accepted += int(hit.sum())
        candidates += size
    return ChunkOutput({"inclusion_p": mom}, accepted, candidates)


def estimate_inclusion_probability_3d(rng, sphere0: Body, sphere1: Body, n_samples: int,
                                      *, chunk_size=None, workers=None) -> EstimatorResult:
    """P[sphere1 inside sphere0 | its surface meets sphere0], by direct event counting."""
    for s in (sphere0, sphere1):
        if s.shape != "ball" or s.dimension != 3:
            raise UsageError("3D inclusion estimator takes two 3D balls")
    R0, R1 = sphere0.radius, sphere1.radius
    t0 = time.perf_counter()
    out = run_chunks(partial(_inclusion_3d_chunk, R0, R1, root_seed(rng)), n_samples, chunk_size, workers)
    V0, F0, M0 = theory.sphere_measures(R0)
    V1, F1, M1 = theory.sphere_measures(R1)
    try:
        oracle = theory.inclusion_probability_3d(V0, F0, M0, V1, F1, M1)
    except RegimeViolation:
        oracle = None
    mom = out.moments["inclusion_p"]
    if mom.var_a == 0.0:
        # all-or-nothing outcome: report the exact frequency with zero error
        return EstimatorResult("inclusion_p", mom.ratio, 0.0, out.candidates, out.accepted, oracle,
                               0.0 if oracle and oracle.value == mom.ratio else None, time.perf_counter() - t0)
    return EstimatorResult.from_moments("inclusion_p", mom, out.candidates, out.accepted, oracle,
                                        time.perf_counter() - t0)


def infinite_walk_process(body: Body, truncation_factor: float = DEFAULT_TRUNCATION,
                          step: StepLengthLaw | None = None) -> CurveProcess:
    """Exponential-step walk of length truncation_factor * diam(body) standing in for an infinite curve."""
    step = step or StepLengthLaw.exponential(0.1 * body.diameter)
    return pearson_process(step, truncation_factor * body.diameter, body.dimension)


def estimate_infinite_curve_mean_length(rng, body: Body, process: CurveProcess | None = None,
                                        truncation_factor: float = DEFAULT_TRUNCATION, n_samples: int = 100_000,
                                        *, motions_per_curve=None, chunk_size=None, workers=None) -> EstimatorResult:
    """Inside length per boundary-crossing pair, for lines or truncated walks."""
    if process is None:
        process = infinite_walk_process(body, truncation_factor)
    elif process.kind == "pearson":
        process = process.with_length(truncation_factor * body.diameter)
    elif process.kind != "line":
        raise UsageError("infinite-curve estimator takes a pearson walk or a line process")
    t0 = time.perf_counter()
    out = _run(body, process, _obs_crossings, rng, n_samples, motions_per_curve or INFINITE_MOTIONS_PER_CURVE,
               chunk_size, workers)
    asymptote = theory.mean_chord(body)
    finite = theory.harmonic_mean_length(process.mean_length, body)
    return EstimatorResult.from_moments(
        "mean_length_infinite", out.moments["mean_length"], out.candidates, out.accepted, asymptote,
        time.perf_counter() - t0,
        finite_theory=finite.value,
        truncation_offset=abs(finite.value - asymptote.value),
        curve_length=process.mean_length,
    )


def estimate_ocd_mean_chord(rng, body: Body, n_samples: int, *, chunk_size=None, workers=None
                            ) -> dict[str, EstimatorResult]:
    """One-chord and multiple-chord means of isotropic lines, and their ratio, from one stream."""
    from .curves import line_process

    t0 = time.perf_counter()
    out = _run(body, line_process(body.dimension), _obs_chords, rng, n_samples, None, chunk_size, workers)
    wall = time.perf_counter() - t0
    ocd = theory.ocd_mean_chord(body)
    mcd = theory.mean_chord(body)
    from .bodies import convex_hull

    ratio = theory.TheoryValue(body.surface / convex_hull(body).surface, "ocd_mean_chord",
                               {"ratio": "ocd/mcd", "body": body.to_descriptor()})
    oracle = {"ocd": ocd, "mcd": mcd, "ocd_over_mcd": ratio}
    return {
        name: EstimatorResult.from_moments(name, out.moments[name], out.candidates, out.accepted, oracle[name], wall)
        for name in oracle
    }


def invariance_processes(mean_length: float, dimension: int = 2) -> dict[str, CurveProcess]:
    """Five curve families sharing the same mean length."""
    s = float(mean_length)
    return {
        "constant_walk": pearson_process(StepLengthLaw.constant(s / 20), s, dimension),
        "exponential_walk": pearson_process(StepLengthLaw.exponential(s / 20), s, dimension),
        "gamma_walk": pearson_process(StepLengthLaw.gamma(2.0, s / 40), s, dimension),
        "ramified_tree": tree_process(5, StepLengthLaw.exponential(s / 5), dimension),
        "segment": segment_process(s, dimension),
    }


def pairwise_z(results: list[EstimatorResult]) -> np.ndarray:
    k = len(results)
    z = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            if i != j:
                a, b = results[i], results[j]
                z[i, j] = (a.estimate - b.estimate) / math.hypot(a.std_error, b.std_error)
    return z


def invariance_suite(rng, body: Body, process_list, n_samples: int, *, motions_per_curve=None, chunk_size=None,
                     workers=None) -> tuple[list[EstimatorResult], np.ndarray]:
    """Mean traversed length for several processes and the matrix of pairwise z values."""
    if isinstance(process_list, dict):
        items = list(process_list.items())
    else:
        items = [(p.kind, p) for p in process_list]
    seed = root_seed(rng)
    results = []
    for i, (name, proc) in enumerate(items):
        res = estimate_mean_traversed_length(seed + i, body, proc, n_samples, motions_per_curve=motions_per_curve,
                                             chunk_size=chunk_size, workers=workers)
        res.name = name
        results.append(res)
    return results, pairwise_z(results)
