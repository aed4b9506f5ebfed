"""Observation windows with exact measures and geometric predicates.

Every body is defined about its own reference origin and never moves; the
curves are placed relative to it.  Supported shapes:

========  =====================  ==========
shape     parameters             dimension
========  =====================  ==========
ball      radius                 any n >= 2
box       edge lengths           any n >= 2
annulus   r_in, r_out            2
polygon   vertex list            2
shell     r_in, r_out            3
========  =====================  ==========
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.special import gammaln

from .errors import CapabilityError, UsageError

# A discriminant this small relative to the squared lengths involved is a
# graze, which has kinematic measure zero.
TANGENCY_TOL = 1e-12

# Kernel shape codes shared with the compiled and numpy kernels.
KIND_SHELL = 0
KIND_BOX = 1
KIND_POLYGON = 2

SHAPES = ("ball", "box", "annulus", "polygon", "shell")


def unit_sphere_area(m: int) -> float:
    """Surface area of the unit m-sphere in R^(m+1)."""
    if m < 0:
        raise UsageError(f"sphere dimension must be >= 0, got {m}")
    return 2.0 * math.exp(0.5 * (m + 1) * math.log(math.pi) - gammaln(0.5 * (m + 1)))


def _cross(a, b) -> float:
    return a[0] * b[1] - a[1] * b[0]


def _segments_intersect(p0, p1, q0, q1) -> bool:
    d = p1 - p0
    e = q1 - q0
    denom = _cross(d, e)
    if denom == 0.0:
        return False
    w = q0 - p0
    t = _cross(w, e) / denom
    u = _cross(w, d) / denom
    return 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0


@dataclass(frozen=True, eq=False)
class Body:
    """An immutable observation window.

    Use the module-level constructors (:func:`ball`, :func:`box`, ...) rather
    than instantiating directly.
    """

    shape: str
    dimension: int
    radius: float = 0.0
    r_in: float = 0.0
    edges: tuple[float, ...] = ()
    vertices: np.ndarray | None = field(default=None, repr=False)

    volume: float = field(init=False)
    surface: float = field(init=False)
    euler_char: int = field(init=False)
    min_curvature_radius: float = field(init=False)
    max_curvature_radius: float = field(init=False)
    mean_curvature_integral: float | None = field(init=False)
    circumradius: float = field(init=False)
    bbox_lo: np.ndarray = field(init=False, repr=False)
    bbox_hi: np.ndarray = field(init=False, repr=False)
    diameter: float = field(init=False)

    def __post_init__(self):
        n = self.dimension
        set_ = object.__setattr__
        mean_curv = None
        if self.shape in ("ball", "annulus", "shell"):
            R, r = self.radius, self.r_in
            area_n = unit_sphere_area(n - 1)
            volume = area_n / n * (R**n - r**n)
            surface = area_n * (R ** (n - 1) + r ** (n - 1))
            if self.shape == "ball":
                chi = 1
                kmin = kmax = R
            else:
                chi = 0 if n == 2 else 2
                kmin, kmax = r, R
            if n == 3:
                # inner sphere bends away from the outward normal
                mean_curv = 4.0 * math.pi * (R - r)
            circ = R
            lo, hi = np.full(n, -R), np.full(n, R)
            diam = 2.0 * R
        elif self.shape == "box":
            e = np.asarray(self.edges, dtype=float)
            volume = float(np.prod(e))
            surface = float(sum(2.0 * volume / ek for ek in e))
            chi = 1
            kmin, kmax = 0.0, math.inf
            if n == 3:
                mean_curv = math.pi * float(e.sum())
            circ = 0.5 * float(np.linalg.norm(e))
            lo, hi = -0.5 * e, 0.5 * e
            diam = 2.0 * circ
        elif self.shape == "polygon":
            v = self.vertices
            nxt = np.roll(v, -1, axis=0)
            volume = 0.5 * abs(float(np.sum(v[:, 0] * nxt[:, 1] - nxt[:, 0] * v[:, 1])))
            surface = float(np.sum(np.linalg.norm(nxt - v, axis=1)))
            chi = 1
            kmin, kmax = 0.0, math.inf
            circ = float(np.max(np.linalg.norm(v, axis=1)))
            lo, hi = v.min(axis=0), v.max(axis=0)
            diff = v[:, None, :] - v[None, :, :]
            diam = float(np.sqrt((diff**2).sum(-1)).max())
        else:
            raise CapabilityError(f"unknown shape {self.shape!r}; supported: {', '.join(SHAPES)}")
        lo = np.array(lo, dtype=float)
        hi = np.array(hi, dtype=float)
        lo.flags.writeable = False
        hi.flags.writeable = False
        for name, value in (
            ("volume", volume),
            ("surface", surface),
            ("euler_char", chi),
            ("min_curvature_radius", kmin),
            ("max_curvature_radius", kmax),
            ("mean_curvature_integral", mean_curv),
            ("circumradius", circ),
            ("bbox_lo", lo),
            ("bbox_hi", hi),
            ("diameter", diam),
        ):
            set_(self, name, value)

    @property
    def is_convex(self) -> bool:
        if self.shape in ("ball", "box"):
            return True
        if self.shape == "polygon":
            return len(_hull_vertices(self.vertices)) == len(self.vertices)
        return False

    @property
    def is_smooth(self) -> bool:
        return self.shape in ("ball", "annulus", "shell")

    def kernel_spec(self) -> tuple[int, np.ndarray, np.ndarray]:
        """(kind code, float parameters, polygon vertices) for the batch kernels."""
        empty = np.zeros((0, 2))
        if self.shape in ("ball", "annulus", "shell"):
            return KIND_SHELL, np.array([self.r_in, self.radius]), empty
        if self.shape == "box":
            return KIND_BOX, 0.5 * np.asarray(self.edges, dtype=float), empty
        return KIND_POLYGON, np.zeros(0), np.ascontiguousarray(self.vertices, dtype=float)

    def scaled(self, lam: float) -> "Body":
        if lam <= 0:
            raise UsageError("scale factor must be positive")
        if self.shape == "polygon":
            return polygon(self.vertices * lam)
        return Body(
            self.shape,
            self.dimension,
            radius=self.radius * lam,
            r_in=self.r_in * lam,
            edges=tuple(e * lam for e in self.edges),
        )

    def to_descriptor(self) -> dict[str, Any]:
        if self.shape == "ball":
            return {"shape": "ball", "dimension": self.dimension, "radius": self.radius}
        if self.shape == "box":
            return {"shape": "box", "edges": list(self.edges)}
        if self.shape == "annulus":
            return {"shape": "annulus", "r_in": self.r_in, "r_out": self.radius}
        if self.shape == "shell":
            return {"shape": "shell", "r_in": self.r_in, "r_out": self.radius}
        return {"shape": "polygon", "vertices": self.vertices.tolist()}

    def __repr__(self) -> str:
        return f"Body({self.to_descriptor()})"


def ball(radius: float, dimension: int = 2) -> Body:
    if radius <= 0:
        raise UsageError("ball radius must be positive")
    if dimension < 2:
        raise UsageError("dimension must be >= 2")
    return Body("ball", int(dimension), radius=float(radius))


def box(edges) -> Body:
    edges = tuple(float(e) for e in edges)
    if len(edges) < 2:
        raise UsageError("box needs at least two edge lengths")
    if any(e <= 0 for e in edges):
        raise UsageError("box edge lengths must be positive")
    return Body("box", len(edges), edges=edges)


def annulus(r_in: float, r_out: float) -> Body:
    if not 0 < r_in < r_out:
        raise UsageError("annulus needs 0 < r_in < r_out")
    return Body("annulus", 2, radius=float(r_out), r_in=float(r_in))


def spherical_shell(r_in: float, r_out: float) -> Body:
    if not 0 < r_in < r_out:
        raise UsageError("shell needs 0 < r_in < r_out")
    return Body("shell", 3, radius=float(r_out), r_in=float(r_in))


def polygon(vertices) -> Body:
    """Simple polygon from an ordered vertex list (either orientation, not closed)."""
    v = np.array(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
        raise UsageError("polygon needs at least 3 two-dimensional vertices")
    if np.allclose(v[0], v[-1]):
        v = v[:-1]
    m = len(v)
    for i in range(m):
        for j in range(i + 1, m):
            if j == i + 1 or (i == 0 and j == m - 1):
                continue
            if _segments_intersect(v[i], v[(i + 1) % m], v[j], v[(j + 1) % m]):
                raise UsageError("polygon is not simple (edges %d and %d cross)" % (i, j))
    area2 = float(np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1]))
    if abs(area2) < 1e-14:
        raise UsageError("polygon has zero area")
    v.flags.writeable = False
    return Body("polygon", 2, vertices=v)


def rotated_box_2d(edges, angle: float) -> Body:
    """A 2D box rotated by ``angle`` about its center, as a polygon."""
    a, b = (0.5 * float(e) for e in edges)
    c, s = math.cos(angle), math.sin(angle)
    corners = np.array([[-a, -b], [a, -b], [a, b], [-a, b]])
    rot = np.array([[c, -s], [s, c]])
    return polygon(corners @ rot.T)


def _check_dim(body: Body, point) -> np.ndarray:
    p = np.asarray(point, dtype=float)
    if p.shape != (body.dimension,):
        raise UsageError(f"point of shape {p.shape} does not match body dimension {body.dimension}")
    return p


def _polygon_contains(v: np.ndarray, p) -> bool:
    x, y = p
    inside = False
    m = len(v)
    for i in range(m):
        x0, y0 = v[i]
        x1, y1 = v[(i + 1) % m]
        if (y0 > y) != (y1 > y):
            xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if x < xc:
                inside = not inside
    return inside


def contains(body: Body, point) -> bool:
    """True iff ``point`` lies in the closed body."""
    p = _check_dim(body, point)
    if body.shape in ("ball", "annulus", "shell"):
        r2 = float(p @ p)
        return body.r_in**2 <= r2 <= body.radius**2
    if body.shape == "box":
        return bool(np.all(np.abs(p) <= 0.5 * np.asarray(body.edges)))
    return _polygon_contains(body.vertices, p)


def _sphere_params(p0, d, r) -> list[float]:
    a = float(d @ d)
    b = float(p0 @ d)
    c = float(p0 @ p0) - r * r
    disc = b * b - a * c
    if disc <= TANGENCY_TOL * a * r * r:
        return []
    sq = math.sqrt(disc)
    return [t for t in ((-b - sq) / a, (-b + sq) / a) if 0.0 < t < 1.0]


def boundary_crossings(body: Body, p0, p1) -> list[float]:
    """Sorted parameters t in (0, 1) where p0 + t (p1 - p0) crosses the boundary.

    Tangential contacts are not reported.
    """
    p0 = _check_dim(body, p0)
    p1 = _check_dim(body, p1)
    d = p1 - p0
    if not np.any(d):
        raise UsageError("segment endpoints coincide")
    if body.shape in ("ball", "annulus", "shell"):
        ts = _sphere_params(p0, d, body.radius)
        if body.r_in > 0:
            ts += _sphere_params(p0, d, body.r_in)
        return sorted(ts)
    if body.shape == "box":
        h = 0.5 * np.asarray(body.edges)
        t_in, t_out = -math.inf, math.inf
        for k in range(body.dimension):
            if d[k] == 0.0:
                if abs(p0[k]) > h[k]:
                    return []
                continue
            t1 = (-h[k] - p0[k]) / d[k]
            t2 = (h[k] - p0[k]) / d[k]
            if t1 > t2:
                t1, t2 = t2, t1
            t_in = max(t_in, t1)
            t_out = min(t_out, t2)
        if t_out - t_in <= TANGENCY_TOL:
            return []
        return [t for t in (t_in, t_out) if 0.0 < t < 1.0]
    v = body.vertices
    m = len(v)
    dn = math.sqrt(float(d @ d))
    ts = []
    for i in range(m):
        q0 = v[i]
        e = v[(i + 1) % m] - q0
        denom = _cross(d, e)
        if abs(denom) <= TANGENCY_TOL * dn * math.hypot(e[0], e[1]):
            continue
        w = q0 - p0
        t = _cross(w, e) / denom
        u = _cross(w, d) / denom
        if 0.0 < t < 1.0 and 0.0 <= u < 1.0:
            ts.append(t)
    return sorted(ts)


def measures(body: Body) -> dict[str, Any]:
    out = {
        "volume": body.volume,
        "surface": body.surface,
        "euler_char": body.euler_char,
        "min_curvature_radius": body.min_curvature_radius,
        "max_curvature_radius": body.max_curvature_radius,
    }
    if body.dimension == 3:
        out["mean_curvature_integral"] = body.mean_curvature_integral
    return out


def _hull_vertices(v: np.ndarray) -> np.ndarray:
    from scipy.spatial import ConvexHull

    hull = ConvexHull(v)
    return v[hull.vertices]


def convex_hull(body: Body) -> Body:
    """Smallest convex body containing ``body``; convex inputs come back unchanged."""
    if body.shape in ("ball", "box"):
        return body
    if body.shape in ("annulus", "shell"):
        return ball(body.radius, body.dimension)
    if body.shape == "polygon":
        hv = _hull_vertices(body.vertices)
        if len(hv) == len(body.vertices):
            return body
        return polygon(hv)
    raise CapabilityError(
        f"convex hull not available for {body.shape!r}; supported: {', '.join(SHAPES)}"
    )


def from_descriptor(desc: dict[str, Any]) -> Body:
    """Build a body from its JSON descriptor, e.g. ``{"shape": "annulus", "r_in": 0.5, "r_out": 1}``."""
    shape = desc.get("shape")
    if shape == "ball":
        return ball(desc["radius"], desc.get("dimension", 2))
    if shape == "box":
        if desc.get("angle"):
            if len(desc["edges"]) != 2:
                raise UsageError("box rotation angle is only supported in 2D")
            return rotated_box_2d(desc["edges"], desc["angle"])
        return box(desc["edges"])
    if shape == "annulus":
        return annulus(desc["r_in"], desc["r_out"])
    if shape == "shell":
        return spherical_shell(desc["r_in"], desc["r_out"])
    if shape == "polygon":
        return polygon(desc["vertices"])
    raise CapabilityError(f"unknown shape {shape!r}; supported: {', '.join(SHAPES)}")
