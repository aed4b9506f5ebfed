"""Named verification batches: Monte Carlo estimates checked against closed forms.

Each suite returns :class:`CheckLine` records; a line passes when
``|estimate - theory| <= tol_sigma * SE + slack``.  ``slack`` is zero except
for truncated walks, where the finite-length offset is allowed on top.
``scale`` multiplies every sample count (use a small value for smoke runs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import estimators as est
from . import theory
from .bodies import Body, annulus, ball
from .curves import circle_process, line_process, segment_process

SUITES = ("cauchy2d", "cauchy3d", "loops2d", "inclusion3d", "ocd", "invariance", "infinite")

FIXED_SAMPLES = 1_000_000
RANDOM_CURVE_SAMPLES = 250_000
WALK_2D_SAMPLES = 100_000
WALK_3D_SAMPLES = 20_000


@dataclass
class CheckLine:
    suite: str
    label: str
    estimate: float
    theory: float
    std_error: float
    tol_sigma: float
    slack: float = 0.0
    criterion: int = 0

    @property
    def z(self) -> float:
        if self.std_error > 0:
            return (self.estimate - self.theory) / self.std_error
        return 0.0 if self.estimate == self.theory else math.inf

    @property
    def passed(self) -> bool:
        return abs(self.estimate - self.theory) <= self.tol_sigma * self.std_error + self.slack

    def format(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        if self.std_error == 0:
            # exact check: no sampling error to scale by
            return (f"{tag} [{self.suite}] {self.label}: value={self.estimate:.12g} expected={self.theory:.12g} "
                    f"|diff|={abs(self.estimate - self.theory):.3g} <= {self.slack:.3g}")
        extra = f" slack={self.slack:.3g}" if self.slack else ""
        return (f"{tag} [{self.suite}] {self.label}: estimate={self.estimate:.6g} theory={self.theory:.6g} "
                f"se={self.std_error:.3g} z={self.z:+.2f}{extra}")


def _n(base: int, scale: float) -> int:
    return max(1000, int(base * scale))


def _line(suite, label, res: est.EstimatorResult, tol, criterion, slack=0.0, theory_value=None) -> CheckLine:
    t = res.theory.value if theory_value is None else theory_value
    return CheckLine(suite, label, res.estimate, t, res.std_error, tol, slack, criterion)


def _pair_line(suite, label, a: est.EstimatorResult, b: est.EstimatorResult, tol, criterion) -> CheckLine:
    """Difference of two independent estimates against zero."""
    return CheckLine(suite, label, a.estimate - b.estimate, 0.0, math.hypot(a.std_error, b.std_error), tol, 0.0,
                     criterion)


def _desc(body: Body) -> str:
    if body.shape == "ball":
        return f"{'disk' if body.dimension == 2 else 'sphere'}({body.radius:g})"
    if body.shape == "annulus":
        return f"annulus({body.r_in:g},{body.radius:g})"
    return body.shape


def cauchy2d(seed: int, tol_sigma: float = 4.0, scale: float = 1.0, workers=None) -> list[CheckLine]:
    disk = ball(1.0)
    lines = []
    for i, length in enumerate((0.5, 2.0, 8.0)):
        r = est.estimate_mean_traversed_length(seed + i, disk, segment_process(length), _n(FIXED_SAMPLES, scale),
                                               workers=workers)
        lines.append(_line("cauchy2d", f"segments l={length:g} on disk(1)", r, tol_sigma, 1))
    chords = est.estimate_ocd_mean_chord(seed + 10, disk, _n(FIXED_SAMPLES, scale), workers=workers)
    lines.append(_line("cauchy2d", "isotropic lines on disk(1), mean chord", chords["mcd"], tol_sigma, 1))
    return lines


def cauchy3d(seed: int, tol_sigma: float = 4.0, scale: float = 1.0, workers=None) -> list[CheckLine]:
    sphere = ball(1.0, 3)
    r = est.estimate_mean_traversed_length(seed, sphere, segment_process(2.0, 3), _n(FIXED_SAMPLES, scale),
                                           workers=workers)
    chords = est.estimate_ocd_mean_chord(seed + 10, sphere, _n(FIXED_SAMPLES, scale), workers=workers)
    return [
        _line("cauchy3d", "segments l=2 on sphere(1)", r, tol_sigma, 3),
        _line("cauchy3d", "isotropic lines on sphere(1), mean chord", chords["mcd"], tol_sigma, 3),
    ]


def loops2d(seed: int, tol_sigma: float = 4.0, scale: float = 1.0, workers=None) -> list[CheckLine]:
    disk = ball(1.0)
    big = {}
    lines = []
    for i, radius in enumerate((3.0, 10.0)):
        big[radius] = est.estimate_mean_traversed_length(seed + i, disk, circle_process(radius),
                                                         _n(FIXED_SAMPLES, scale), workers=workers)
        lines.append(_line("loops2d", f"big loop R={radius:g} on disk(1)", big[radius], tol_sigma, 4))
    lines.append(_pair_line("loops2d", "big loops R=3 vs R=10 agree", big[3.0], big[10.0], tol_sigma, 4))

    radius = 0.25
    small = est.estimate_small_loop_quantities(seed + 5, ball(2.0), radius, _n(FIXED_SAMPLES, scale),
                                               workers=workers)
    for name in ("mean_length", "inclusion_p", "mean_arc", "mean_chi", "mean_chi_open_loop"):
        lines.append(_line("loops2d", f"small loop R1=0.25 in disk(2): {name}", small[name], tol_sigma, 5))
    for name, (diff, se) in est.small_loop_identities(small, 2 * math.pi * radius).items():
        lines.append(CheckLine("loops2d", f"small loop identity {name}", diff, 0.0, se, tol_sigma, 0.0, 5))
    return lines


def inclusion3d(seed: int, tol_sigma: float = 4.0, scale: float = 1.0, workers=None) -> list[CheckLine]:
    circles = est.estimate_small_loop_quantities(seed, ball(2.0), 1.0, _n(FIXED_SAMPLES, scale), workers=workers)
    spheres = est.estimate_inclusion_probability_3d(seed + 1, ball(2.0, 3), ball(1.0, 3), _n(FIXED_SAMPLES, scale),
                                                    workers=workers)
    return [
        _line("inclusion3d", "circle R1=1 inside circle R0=2", circles["inclusion_p"], tol_sigma, 6),
        _line("inclusion3d", "sphere R1=1 inside sphere R0=2", spheres, tol_sigma, 6),
    ]


def ocd(seed: int, tol_sigma: float = 4.0, scale: float = 1.0, workers=None) -> list[CheckLine]:
    ring = annulus(0.5, 1.0)
    res = est.estimate_ocd_mean_chord(seed, ring, _n(FIXED_SAMPLES, scale), workers=workers)
    return [
        _line("ocd", "annulus(0.5,1) one-chord mean", res["ocd"], tol_sigma, 7),
        _line("ocd", "annulus(0.5,1) multiple-chord mean", res["mcd"], tol_sigma, 7),
        _line("ocd", "annulus(0.5,1) OCD/MCD ratio", res["ocd_over_mcd"], tol_sigma, 7),
    ]


def invariance(seed: int, tol_sigma: float = 4.0, scale: float = 1.0, workers=None, body: Body | None = None,
               mean_length: float = 5.0) -> list[CheckLine]:
    body = body or ball(1.0)
    procs = est.invariance_processes(mean_length, body.dimension)
    results = []
    for i, (name, proc) in enumerate(procs.items()):
        n = _n(FIXED_SAMPLES if proc.deterministic else RANDOM_CURVE_SAMPLES, scale)
        r = est.estimate_mean_traversed_length(seed + i, body, proc, n, workers=workers)
        r.name = name
        results.append(r)
    where = _desc(body)
    lines = [_line("invariance", f"{r.name} <s>={mean_length:g} on {where}", r, tol_sigma, 2) for r in results]
    for i in range(len(results)):
        for j in range(i + 1, len(results)):
            a, b = results[i], results[j]
            lines.append(_pair_line("invariance", f"{a.name} vs {b.name}", a, b, tol_sigma, 2))
    return lines


def z_matrix_text(lines: list[CheckLine]) -> str:
    """Pairwise z values of an invariance run laid out as a matrix."""
    pairs = [ln for ln in lines if " vs " in ln.label]
    names: list[str] = []
    for ln in pairs:
        for part in ln.label.split(" vs "):
            if part not in names:
                names.append(part)
    z = np.zeros((len(names), len(names)))
    for ln in pairs:
        a, b = ln.label.split(" vs ")
        i, j = names.index(a), names.index(b)
        z[i, j], z[j, i] = ln.z, -ln.z
    width = max(len(n) for n in names) if names else 0
    rows = [" " * width + "".join(f"{n[:10]:>12}" for n in names)]
    for n, row in zip(names, z):
        rows.append(f"{n:<{width}}" + "".join(f"{v:12.2f}" for v in row))
    return "\n".join(rows)


def infinite(seed: int, tol_sigma: float = 4.0, scale: float = 1.0, workers=None) -> list[CheckLine]:
    lines = []
    for i, (body, n) in enumerate(((ball(1.0), WALK_2D_SAMPLES), (ball(1.0, 3), WALK_3D_SAMPLES))):
        r = est.estimate_infinite_curve_mean_length(seed + i, body, n_samples=_n(n, scale), workers=workers)
        lines.append(_line("infinite", f"walk length 1000*diam on {_desc(body)}", r, tol_sigma, 3,
                           slack=r.extra["truncation_offset"]))
    ring = annulus(0.5, 1.0)
    r = est.estimate_infinite_curve_mean_length(seed + 5, ring, line_process(2), n_samples=_n(FIXED_SAMPLES, scale),
                                                workers=workers)
    lines.append(_line("infinite", "lines on annulus(0.5,1), crossing convention", r, tol_sigma, 3))
    return lines


_RUNNERS = {
    "cauchy2d": cauchy2d,
    "cauchy3d": cauchy3d,
    "loops2d": loops2d,
    "inclusion3d": inclusion3d,
    "ocd": ocd,
    "invariance": invariance,
    "infinite": infinite,
}


def run_suite(name: str, seed: int, tol_sigma: float = 4.0, scale: float = 1.0, workers=None) -> list[CheckLine]:
    try:
        runner = _RUNNERS[name]
    except KeyError:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}") from None
    return runner(seed, tol_sigma, scale, workers)


def eta_identity_lines(max_n: int = 10, tol: float = 1e-12) -> list[CheckLine]:
    """Gamma-function form of eta_n against the sphere-area ratio form."""
    return [
        CheckLine("properties", f"eta_{n} two forms", theory.eta(n).value, theory.eta_from_sphere_areas(n), 0.0,
                  0.0, tol, 8)
        for n in range(2, max_n + 1)
    ]
