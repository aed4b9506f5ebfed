"""Rigid motions under the kinematic density and the intersection of placed curves with bodies.

Two routes compute the same intersection record:

* :func:`intersect` is the scalar reference.  It walks every edge with
  :func:`kinemetrica.bodies.boundary_crossings` and builds the arc-length
  pieces explicitly.
* :func:`tally` evaluates many motions at once through the backend kernel
  (compiled or numpy) and returns per-motion tallies only.

Translations are drawn uniformly from the window ``W`` = bounding box of the
body dilated by the curve circumradius.  Every hitting translation lies in
``W`` for every rotation, so rejection leaves the conditional law exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .bodies import KIND_SHELL, TANGENCY_TOL, Body, boundary_crossings, contains
from .curves import Curve
from .errors import CapabilityError, ConfigurationError, UsageError

BLOCK_EDGES = 32
MAX_REJECTIONS = 10_000_000


@dataclass(frozen=True, eq=False)
class RigidMotion:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float)
        t = np.asarray(self.translation, dtype=float)
        n = len(t)
        if r.shape != (n, n):
            raise UsageError("rotation and translation dimensions disagree")
        if not np.allclose(r @ r.T, np.eye(n), atol=1e-10) or abs(np.linalg.det(r) - 1.0) > 1e-10:
            raise UsageError("rotation must be orthogonal with determinant +1")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @property
    def dimension(self) -> int:
        return len(self.translation)

    @classmethod
    def unchecked(cls, rotation: np.ndarray, translation: np.ndarray) -> "RigidMotion":
        """Skip the orthogonality check (rotation already drawn from a trusted sampler)."""
        m = object.__new__(cls)
        object.__setattr__(m, "rotation", rotation)
        object.__setattr__(m, "translation", translation)
        return m

    @classmethod
    def identity(cls, dimension: int) -> "RigidMotion":
        return cls(np.eye(dimension), np.zeros(dimension))

    @classmethod
    def from_angle(cls, angle: float, translation) -> "RigidMotion":
        c, s = math.cos(angle), math.sin(angle)
        return cls(np.array([[c, -s], [s, c]]), translation)

    @classmethod
    def from_quaternion(cls, q, translation) -> "RigidMotion":
        return cls(quaternion_to_matrix(np.asarray(q, dtype=float)[None])[0], translation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        return points @ self.rotation.T + self.translation

    def to_json(self) -> str:
        return json.dumps({"rot": self.rotation.tolist(), "t": self.translation.tolist()})


def quaternion_to_matrix(q: np.ndarray) -> np.ndarray:
    q = q / np.linalg.norm(q, axis=-1, keepdims=True)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    return np.stack(
        [
            np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], -1),
            np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], -1),
            np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], -1),
        ],
        -2,
    )


def haar_rotations(rng: np.random.Generator, dimension: int, size: int) -> np.ndarray:
    """``size`` independent Haar-uniform rotation matrices in SO(n)."""
    if dimension == 2:
        th = rng.uniform(0.0, 2.0 * math.pi, size)
        c, s = np.cos(th), np.sin(th)
        return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
    if dimension == 3:
        return quaternion_to_matrix(rng.standard_normal((size, 4)))
    g = rng.standard_normal((size, dimension, dimension))
    q, r = np.linalg.qr(g)
    q = q * np.sign(np.diagonal(r, axis1=-2, axis2=-1))[:, None, :]
    neg = np.linalg.det(q) < 0
    q[neg, :, 0] *= -1.0
    return q


@dataclass
class IntersectionResult:
    inside_length: float
    pieces: list[tuple[float, float]]
    crossing_count: int
    fully_inside: bool
    fully_outside: bool
    # connected inside components (differs from len(pieces) only for trees)
    components: int = 0


@dataclass
class Tally:
    """Per-motion tallies for a batch of candidate motions."""

    inside_length: np.ndarray
    chi: np.ndarray
    crossings: np.ndarray
    fully_inside: np.ndarray
    fully_outside: np.ndarray

    @property
    def hit(self) -> np.ndarray:
        return ~self.fully_outside

    def __len__(self) -> int:
        return len(self.inside_length)


# ---------------------------------------------------------------- sampling window


def window(body: Body, curve: Curve) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned translation window covering every hitting position."""
    if curve.kind == "line":
        raise CapabilityError("lines are sampled by offset, not by translation window")
    rho = curve.circumradius
    return body.bbox_lo - rho, body.bbox_hi + rho


def window_measure(body: Body, curve: Curve) -> float:
    """Lebesgue measure of the translation window (offset square for lines)."""
    if curve.kind == "line":
        return (2.0 * body.circumradius) ** (body.dimension - 1)
    lo, hi = window(body, curve)
    return float(np.prod(hi - lo))


def _line_half_length(body: Body) -> float:
    # the line's foot point is its closest approach to the origin, so every
    # point of the body on the line is within circumradius of the foot
    return 2.0 * body.circumradius


def draw_candidates(rng: np.random.Generator, body: Body, curve: Curve, size: int):
    """Rotations (size, n, n) and translations (size, n) from the sampling law."""
    n = body.dimension
    rots = haar_rotations(rng, n, size)
    if curve.kind == "line":
        rho = body.circumradius
        off = np.zeros((size, n))
        off[:, 1:] = rng.uniform(-rho, rho, (size, n - 1))
        trans = np.einsum("mij,mj->mi", rots, off)
        return rots, trans
    lo, hi = window(body, curve)
    return rots, rng.uniform(lo, hi, (size, n))


# ---------------------------------------------------------------- scalar reference


def _graph_geometry(curve: Curve, motion: RigidMotion):
    if curve.kind == "line":
        raise AssertionError("lines are converted before reaching here")
    return motion.apply(curve.vertices), curve.edges, curve.cum_length


def _line_as_segment(body: Body, curve: Curve, motion: RigidMotion) -> tuple[Curve, RigidMotion]:
    from .curves import make_segment

    direction = motion.rotation[:, 0]
    t = motion.translation
    foot = t - (t @ direction) * direction
    seg = make_segment(2.0 * _line_half_length(body), body.dimension)
    return seg, RigidMotion(motion.rotation, foot)


def _merge(intervals: list[tuple[float, float, int, int]], edges: np.ndarray) -> list[tuple[float, float]]:
    # intervals carry (s0, s1, edge index, touches-end flags)
    out: list[list[float]] = []
    last_edge = -2
    for s0, s1, ei, starts_at_vertex in intervals:
        if (
            out
            and starts_at_vertex
            and last_edge == ei - 1
            and edges[ei - 1][1] == edges[ei][0]
            and abs(out[-1][1] - s0) <= 1e-12 * max(1.0, s0)
        ):
            out[-1][1] = s1
        else:
            out.append([s0, s1])
        last_edge = ei
    return [(a, b) for a, b in out]


def _intersect_graph(body: Body, curve: Curve, motion: RigidMotion) -> IntersectionResult:
    placed, edges, cum = _graph_geometry(curve, motion)
    vin = [contains(body, p) for p in placed]
    raw = []
    total = 0.0
    ncross = 0
    full = 0
    interior = 0
    for ei, (a, b) in enumerate(edges):
        p0, p1 = placed[a], placed[b]
        seg = float(cum[ei + 1] - cum[ei])
        ts = boundary_crossings(body, p0, p1)
        state = vin[a]
        k = len(ts)
        ncross += k
        if k == 0 and state:
            full += 1
        bounds = [0.0] + ts + [1.0]
        for j in range(k + 1):
            if state:
                s0 = cum[ei] + bounds[j] * seg
                s1 = cum[ei] + bounds[j + 1] * seg
                raw.append((float(s0), float(s1), ei, j == 0))
                total += (bounds[j + 1] - bounds[j]) * seg
                if 0 < j < k:
                    interior += 1
            state = not state
    pieces = _merge(raw, edges)
    if curve.kind == "closed" and len(pieces) > 1:
        if pieces[0][0] <= 1e-12 and abs(pieces[-1][1] - curve.total_length) <= 1e-12 * curve.total_length:
            first = pieces.pop(0)
            pieces[-1] = (pieces[-1][0], pieces[-1][1] + (first[1] - first[0]))
    nin = sum(vin)
    fully_inside = ncross == 0 and nin == len(placed)
    fully_outside = ncross == 0 and nin == 0
    return IntersectionResult(
        inside_length=total,
        pieces=pieces,
        crossing_count=ncross,
        fully_inside=fully_inside,
        fully_outside=fully_outside,
        components=nin - full + interior,
    )


def _circle_frame(curve: Curve, motion: RigidMotion):
    return motion.translation, motion.rotation[:, 0], motion.rotation[:, 1]


def _circle_crossing_angles(body: Body, c, u1, u2, r) -> list[float]:
    """Angles phi in [0, 2pi) where c + r (cos phi u1 + sin phi u2) crosses the body boundary."""
    angles = []
    if body.shape in ("ball", "annulus", "shell"):
        a1, a2 = float(c @ u1), float(c @ u2)
        rho = math.hypot(a1, a2)
        if rho == 0.0:
            return []
        phc = math.atan2(a2, a1)
        radii = [body.radius] + ([body.r_in] if body.r_in > 0 else [])
        for R in radii:
            kappa = (R * R - float(c @ c) - r * r) / (2.0 * r * rho)
            if -1.0 + TANGENCY_TOL < kappa < 1.0 - TANGENCY_TOL:
                al = math.acos(kappa)
                angles += [(phc + al) % (2 * math.pi), (phc - al) % (2 * math.pi)]
        return sorted(angles)
    if body.dimension != 2:
        raise CapabilityError("circle loops against 3D boxes are not supported")
    if body.shape == "box":
        a, b = (0.5 * e for e in body.edges)
        poly = np.array([[-a, -b], [a, -b], [a, b], [-a, b]])
    else:
        poly = body.vertices
    m = len(poly)
    for i in range(m):
        q0 = poly[i]
        e = poly[(i + 1) % m] - q0
        w = q0 - c
        aa = float(e @ e)
        bb = float(w @ e)
        cc = float(w @ w) - r * r
        disc = bb * bb - aa * cc
        if disc <= TANGENCY_TOL * aa * r * r:
            continue
        sq = math.sqrt(disc)
        for u in ((-bb - sq) / aa, (-bb + sq) / aa):
            if 0.0 <= u < 1.0:
                p = w + u * e
                angles.append(math.atan2(float(p @ u2), float(p @ u1)) % (2 * math.pi))
    return sorted(angles)


def _intersect_circle(body: Body, curve: Curve, motion: RigidMotion) -> IntersectionResult:
    c, u1, u2 = _circle_frame(curve, motion)
    r = curve.radius
    L = curve.total_length
    angles = _circle_crossing_angles(body, c, u1, u2, r)

    def point(phi):
        return c + r * (math.cos(phi) * u1 + math.sin(phi) * u2)

    if not angles:
        inside = contains(body, point(0.0))
        return IntersectionResult(
            inside_length=L if inside else 0.0,
            pieces=[(0.0, L)] if inside else [],
            crossing_count=0,
            fully_inside=inside,
            fully_outside=not inside,
            components=0,
        )
    two_pi = 2.0 * math.pi
    bounds = angles + [angles[0] + two_pi]
    arcs = []
    for j in range(len(angles)):
        lo, hi = bounds[j], bounds[j + 1]
        if contains(body, point(0.5 * (lo + hi))):
            arcs.append((lo, hi))
    pieces = []
    for lo, hi in arcs:
        if hi > two_pi:
            # wraps through phi = 0; split at the parameter origin
            pieces.append((r * lo, L))
            pieces.append((0.0, r * (hi - two_pi)))
        else:
            pieces.append((r * lo, r * hi))
    pieces.sort()
    if len(pieces) > 1 and pieces[0][0] <= 1e-12 and abs(pieces[-1][1] - L) <= 1e-12 * L:
        first = pieces.pop(0)
        pieces[-1] = (pieces[-1][0], pieces[-1][1] + first[1])
    total = sum(b - a for a, b in pieces)
    return IntersectionResult(
        inside_length=total,
        pieces=pieces,
        crossing_count=len(angles),
        fully_inside=False,
        fully_outside=False,
        components=len(arcs),
    )


def intersect(body: Body, curve: Curve, motion: RigidMotion) -> IntersectionResult:
    """Full intersection record of ``motion`` applied to ``curve`` against ``body``."""
    if body.dimension != curve.dimension or motion.dimension != body.dimension:
        raise UsageError("body, curve and motion dimensions must match")
    if curve.kind == "circle":
        return _intersect_circle(body, curve, motion)
    if curve.kind == "line":
        seg, foot_motion = _line_as_segment(body, curve, motion)
        return _intersect_graph(body, seg, foot_motion)
    return _intersect_graph(body, curve, motion)


def piece_count_as_chi(result: IntersectionResult, curve: Curve) -> int:
    """Euler-characteristic count: pieces for fibers, sub-trees for trees, 0 for an enclosed loop."""
    if curve.topology == "loop":
        return 0 if result.fully_inside else len(result.pieces)
    return result.components


# ---------------------------------------------------------------- batch tallies


def edge_blocks(curve: Curve, size: int = BLOCK_EDGES):
    """Bounding spheres of consecutive edge blocks, for culling in the compiled kernel."""
    v, e = curve.vertices, curve.edges
    E = len(e)
    starts = np.arange(0, E, size)
    a, b = v[e[:, 0]], v[e[:, 1]]
    lo = np.minimum.reduceat(np.minimum(a, b), starts, axis=0)
    hi = np.maximum.reduceat(np.maximum(a, b), starts, axis=0)
    center = 0.5 * (lo + hi)
    owner = np.repeat(np.arange(len(starts)), np.diff(np.append(starts, E)))
    da = np.linalg.norm(a - center[owner], axis=1)
    db = np.linalg.norm(b - center[owner], axis=1)
    radius = np.maximum.reduceat(np.maximum(da, db), starts)
    return np.append(starts, E).astype(np.int64), np.ascontiguousarray(center), radius * (1 + 1e-12) + 1e-300


def _tally_circles_shell(body: Body, r: float, rots, trans) -> Tally:
    c = trans
    u1, u2 = rots[:, :, 0], rots[:, :, 1]
    a1 = np.einsum("mi,mi->m", c, u1)
    a2 = np.einsum("mi,mi->m", c, u2)
    rho = np.hypot(a1, a2)
    c2 = np.einsum("mi,mi->m", c, c)

    def arc(R):
        # angular measure inside the ball of radius R, plus partial-crossing flag
        with np.errstate(divide="ignore", invalid="ignore"):
            kappa = (R * R - c2 - r * r) / (2.0 * r * rho)
        kappa = np.where(rho == 0.0, np.where(c2 + r * r <= R * R, np.inf, -np.inf), kappa)
        partial = (kappa > -1.0 + TANGENCY_TOL) & (kappa < 1.0 - TANGENCY_TOL)
        full = kappa >= 1.0 - TANGENCY_TOL
        theta = np.where(partial, 2.0 * (math.pi - np.arccos(np.clip(kappa, -1, 1))), np.where(full, 2 * math.pi, 0.0))
        return theta, partial, full

    th_out, p_out, f_out = arc(body.radius)
    if body.r_in > 0:
        th_in, p_in, f_in = arc(body.r_in)
    else:
        th_in = np.zeros_like(th_out)
        p_in = f_in = np.zeros_like(p_out)
    inside = r * (th_out - th_in)
    crossings = 2 * p_out.astype(np.int64) + 2 * p_in.astype(np.int64)
    fully_inside = f_out & ~p_in & ~f_in
    fully_outside = (crossings == 0) & ~fully_inside
    pieces = np.where(p_out & p_in, 2, np.where(crossings > 0, 1, 0)).astype(np.int64)
    return Tally(np.where(fully_outside, 0.0, inside), pieces, crossings, fully_inside, fully_outside)


def _tally_circles_generic(body: Body, curve: Curve, rots, trans) -> Tally:
    # polygons and boxes: per-motion scalar route (not a hot path)
    M = len(rots)
    out = Tally(np.zeros(M), np.zeros(M, np.int64), np.zeros(M, np.int64), np.zeros(M, bool), np.zeros(M, bool))
    for m in range(M):
        res = _intersect_circle(body, curve, RigidMotion.unchecked(rots[m], trans[m]))
        out.inside_length[m] = res.inside_length
        out.chi[m] = piece_count_as_chi(res, curve)
        out.crossings[m] = res.crossing_count
        out.fully_inside[m] = res.fully_inside
        out.fully_outside[m] = res.fully_outside
    return out


def tally(body: Body, curve: Curve, rots: np.ndarray, trans: np.ndarray, kernel=None) -> Tally:
    """Evaluate many motions of one curve; ``kernel`` overrides the backend's ``tally_graph``."""
    if body.dimension != curve.dimension:
        raise UsageError("body and curve dimensions must match")
    M = len(rots)
    rots = np.ascontiguousarray(rots, dtype=float)
    trans = np.ascontiguousarray(trans, dtype=float)
    if curve.kind == "circle":
        kind, _, _ = body.kernel_spec()
        if kind == KIND_SHELL:
            return _tally_circles_shell(body, curve.radius, rots, trans)
        return _tally_circles_generic(body, curve, rots, trans)
    if curve.kind == "line":
        from .curves import make_segment

        direction = rots[:, :, 0]
        trans = trans - np.einsum("mi,mi->m", trans, direction)[:, None] * direction
        curve = make_segment(2.0 * _line_half_length(body), body.dimension)

    out = Tally(np.zeros(M), np.zeros(M, np.int64), np.zeros(M, np.int64), np.zeros(M, bool), np.ones(M, bool))
    # a translation farther than both circumradii cannot hit
    reach = curve.circumradius + body.circumradius
    near = np.einsum("mi,mi->m", trans, trans) <= reach * reach
    idx = np.flatnonzero(near)
    if len(idx) == 0:
        return out
    kind, params, poly = body.kernel_spec()
    starts, centers, radii = edge_blocks(curve)
    fn = kernel or backend.tally_graph
    ins, chi, cross, nin = fn(
        np.ascontiguousarray(curve.vertices),
        np.ascontiguousarray(curve.edges, dtype=np.int64),
        np.ascontiguousarray(rots[idx]),
        np.ascontiguousarray(trans[idx]),
        kind,
        params,
        poly,
        starts,
        centers,
        radii,
        float(body.circumradius),
    )
    out.inside_length[idx] = ins
    out.chi[idx] = chi
    out.crossings[idx] = cross
    out.fully_inside[idx] = (cross == 0) & (nin == curve.n_vertices)
    out.fully_outside[idx] = (cross == 0) & (nin == 0)
    return out


def sample_hitting_motion(rng: np.random.Generator, body: Body, curve: Curve) -> tuple[RigidMotion, IntersectionResult]:
    """One motion from the kinematic density conditioned on hitting ``body``."""
    if body.dimension != curve.dimension:
        raise UsageError("body and curve dimensions must match")
    tried = 0
    batch = 64
    while tried < MAX_REJECTIONS:
        rots, trans = draw_candidates(rng, body, curve, batch)
        t = tally(body, curve, rots, trans)
        hits = np.flatnonzero(t.hit)
        if len(hits):
            m = int(hits[0])
            motion = RigidMotion(rots[m], trans[m])
            return motion, intersect(body, curve, motion)
        tried += batch
        batch = min(batch * 2, 65536)
    raise ConfigurationError(
        f"no hitting position after {tried} candidates; acceptance probability is below 1e-6"
    )
