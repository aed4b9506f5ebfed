"""Moving objects: segments, Pearson walks, circle loops, ramified trees and lines.

All curves are stored in a local frame about a reference origin.  Polyline,
closed-polyline and tree geometries share one representation: a vertex array
plus an edge list ordered so that arc length runs through the edges in order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import CapabilityError, UsageError

KINDS = ("polyline", "closed", "circle", "tree", "line")
TOPOLOGY = {"polyline": "fiber", "line": "fiber", "closed": "loop", "circle": "loop", "tree": "tree"}


@dataclass(frozen=True)
class StepLengthLaw:
    """I.i.d. law for walk steps or tree edges."""

    law: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.law not in ("constant", "exponential", "gamma", "pareto"):
            raise UsageError(f"unknown step law {self.law!r}")
        if any(p <= 0 for p in self.params):
            raise UsageError(f"{self.law} law parameters must be positive")

    @classmethod
    def constant(cls, value: float) -> "StepLengthLaw":
        return cls("constant", (float(value),))

    @classmethod
    def exponential(cls, mean: float) -> "StepLengthLaw":
        return cls("exponential", (float(mean),))

    @classmethod
    def gamma(cls, shape: float, scale: float) -> "StepLengthLaw":
        return cls("gamma", (float(shape), float(scale)))

    @classmethod
    def pareto(cls, x_min: float, alpha: float) -> "StepLengthLaw":
        return cls("pareto", (float(x_min), float(alpha)))

    @property
    def mean(self) -> float:
        p = self.params
        if self.law in ("constant", "exponential"):
            return p[0]
        if self.law == "gamma":
            return p[0] * p[1]
        x_min, alpha = p
        return alpha * x_min / (alpha - 1.0) if alpha > 1.0 else math.inf

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        p = self.params
        if self.law == "constant":
            return np.full(size, p[0])
        if self.law == "exponential":
            return rng.exponential(p[0], size)
        if self.law == "gamma":
            return rng.gamma(p[0], p[1], size)
        # numpy's pareto is the Lomax form; shift to the classical one
        return p[0] * (1.0 + rng.pareto(p[1], size))

    def to_descriptor(self) -> dict[str, Any]:
        names = {
            "constant": ("value",),
            "exponential": ("mean",),
            "gamma": ("shape", "scale"),
            "pareto": ("x_min", "alpha"),
        }[self.law]
        return {"law": self.law, **dict(zip(names, self.params))}

    @classmethod
    def from_descriptor(cls, desc: dict[str, Any]) -> "StepLengthLaw":
        law = desc.get("law")
        if law == "constant":
            return cls.constant(desc["value"])
        if law == "exponential":
            return cls.exponential(desc["mean"])
        if law == "gamma":
            return cls.gamma(desc["shape"], desc["scale"])
        if law == "pareto":
            return cls.pareto(desc["x_min"], desc["alpha"])
        raise UsageError(f"unknown step law {law!r}")


@dataclass(frozen=True, eq=False)
class Curve:
    kind: str
    dimension: int
    vertices: np.ndarray = field(repr=False)
    edges: np.ndarray = field(repr=False)
    radius: float = 0.0

    total_length: float = field(init=False)
    topology: str = field(init=False)
    circumradius: float = field(init=False)
    min_curvature_radius: float = field(init=False)
    cum_length: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        set_ = object.__setattr__
        for arr in (self.vertices, self.edges):
            arr.flags.writeable = False
        set_(self, "topology", TOPOLOGY[self.kind])
        if self.kind == "circle":
            set_(self, "total_length", 2.0 * math.pi * self.radius)
            set_(self, "circumradius", self.radius)
            set_(self, "min_curvature_radius", self.radius)
            set_(self, "cum_length", np.zeros(0))
            return
        if self.kind == "line":
            set_(self, "total_length", math.inf)
            set_(self, "circumradius", math.inf)
            set_(self, "min_curvature_radius", math.inf)
            set_(self, "cum_length", np.zeros(0))
            return
        v, e = self.vertices, self.edges
        seg = np.linalg.norm(v[e[:, 1]] - v[e[:, 0]], axis=1)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        cum.flags.writeable = False
        set_(self, "cum_length", cum)
        set_(self, "total_length", float(cum[-1]))
        set_(self, "circumradius", float(np.max(np.linalg.norm(v, axis=1))))
        # straight segment: no corners, radius is infinite
        set_(self, "min_curvature_radius", math.inf if len(e) == 1 else 0.0)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def is_closed(self) -> bool:
        return self.kind in ("closed", "circle")

    @property
    def disk_area(self) -> float:
        """Area enclosed by a planar circle loop (the filled-loop F1)."""
        if self.kind != "circle":
            raise CapabilityError("filled area is only defined for circle loops")
        return math.pi * self.radius**2

    def scaled(self, lam: float) -> "Curve":
        return Curve(self.kind, self.dimension, self.vertices * lam, self.edges.copy(), self.radius * lam)


def _chain_edges(m: int, closed: bool = False) -> np.ndarray:
    e = np.stack([np.arange(m - 1), np.arange(1, m)], axis=1)
    if closed:
        e = np.vstack([e, [[m - 1, 0]]])
    return e.astype(np.int64)


def _isotropic(rng: np.random.Generator, size: int, dimension: int) -> np.ndarray:
    g = rng.standard_normal((size, dimension))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def make_segment(length: float, dimension: int = 2) -> Curve:
    """Straight segment along the first axis, centered on its midpoint."""
    if not length > 0:
        raise UsageError("segment length must be positive")
    v = np.zeros((2, dimension))
    v[0, 0], v[1, 0] = -0.5 * length, 0.5 * length
    return Curve("polyline", dimension, v, _chain_edges(2))


def make_polyline(vertices, closed: bool = False) -> Curve:
    v = np.array(vertices, dtype=float)
    if v.ndim != 2 or len(v) < 2:
        raise UsageError("polyline needs at least two vertices")
    if closed:
        if not np.allclose(v[0], v[-1]):
            raise UsageError("closed polyline must repeat its first vertex at the end")
        v = v[:-1]
        if len(v) < 3:
            raise UsageError("closed polyline needs at least three distinct vertices")
        return Curve("closed", v.shape[1], v, _chain_edges(len(v), closed=True))
    return Curve("polyline", v.shape[1], v, _chain_edges(len(v)))


def make_line(dimension: int = 2) -> Curve:
    """An infinite straight line through the origin along the first axis."""
    v = np.zeros((1, dimension))
    return Curve("line", dimension, v, np.zeros((0, 2), dtype=np.int64))


def make_circle_loop(radius: float, dimension: int = 2) -> Curve:
    """Analytic circle about the origin, in the plane of the first two axes."""
    if not radius > 0:
        raise UsageError("circle radius must be positive")
    if dimension not in (2, 3):
        raise UsageError("circle loops exist in 2D and 3D only")
    return Curve("circle", dimension, np.zeros((0, dimension)), np.zeros((0, 2), dtype=np.int64), float(radius))


def make_pearson_walk(
    rng: np.random.Generator, step_law: StepLengthLaw, target_length: float, dimension: int = 2
) -> Curve:
    """Isotropic walk with i.i.d. steps, last step clipped so the length is exactly ``target_length``."""
    if not target_length > 0:
        raise UsageError("target length must be positive")
    mean = step_law.mean
    # rounded so that scaling target and steps together keeps the batch size
    batch = int(min(max(16, 1.2 * round(target_length / mean, 6) + 16), 1_000_000)) if math.isfinite(mean) else 64
    steps, dirs = [], []
    total = 0.0
    while total < target_length:
        s = step_law.sample(rng, batch)
        # directions drawn per batch, so stream use does not hinge on where
        # the clipped step falls (keeps scaled runs on paired streams)
        dirs.append(_isotropic(rng, batch, dimension))
        steps.append(s)
        total += float(s.sum())
    steps = np.concatenate(steps)
    cum = np.cumsum(steps)
    k = int(np.searchsorted(cum, target_length))
    steps = steps[: k + 1].copy()
    steps[k] = target_length - (cum[k - 1] if k > 0 else 0.0)
    dirs = np.concatenate(dirs)[: k + 1]
    v = np.zeros((k + 2, dimension))
    np.cumsum(dirs * steps[:, None], axis=0, out=v[1:])
    walk = Curve("polyline", dimension, v, _chain_edges(k + 2))
    mid = arc_point(walk, 0.5 * walk.total_length)
    return Curve("polyline", dimension, v - mid, walk.edges.copy())


def _dfs_edge_order(n_vertices: int, edges: list[tuple[int, int]]) -> np.ndarray:
    adj: list[list[int]] = [[] for _ in range(n_vertices)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    out = []
    seen = [False] * n_vertices
    stack = [0]
    seen[0] = True
    # iterative preorder; each edge is emitted parent -> child
    while stack:
        u = stack.pop()
        for w in reversed(adj[u]):
            if not seen[w]:
                seen[w] = True
                out.append((u, w))
                stack.append(w)
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def make_ramified_tree(
    rng: np.random.Generator, branch_count: int, edge_law: StepLengthLaw, dimension: int = 2
) -> Curve:
    """Grow a tree by attaching isotropic branches at points chosen uniformly by arc length."""
    if branch_count < 1:
        raise UsageError("branch_count must be >= 1")
    lengths = edge_law.sample(rng, branch_count)
    dirs = _isotropic(rng, branch_count, dimension)
    verts = [np.zeros(dimension), dirs[0] * lengths[0]]
    edges = [(0, 1)]
    for k in range(1, branch_count):
        seg = np.array([np.linalg.norm(verts[b] - verts[a]) for a, b in edges])
        i = int(rng.choice(len(edges), p=seg / seg.sum()))
        u = rng.random()
        a, b = edges[i]
        attach = len(verts)
        verts.append(verts[a] + u * (verts[b] - verts[a]))
        edges[i] = (a, attach)
        edges.append((attach, b))
        verts.append(verts[attach] + dirs[k] * lengths[k])
        edges.append((attach, len(verts) - 1))
    v = np.array(verts)
    e = _dfs_edge_order(len(v), edges)
    mids = 0.5 * (v[e[:, 0]] + v[e[:, 1]])
    w = np.linalg.norm(v[e[:, 1]] - v[e[:, 0]], axis=1)
    center = (mids * w[:, None]).sum(0) / w.sum()
    return Curve("tree", dimension, v - center, e)


def arc_point(curve: Curve, s: float) -> np.ndarray:
    """Point at arc length ``s`` (trees: along the depth-first edge order)."""
    if curve.kind == "line":
        raise CapabilityError("infinite lines have no arc-length parameterization")
    if not 0.0 <= s <= curve.total_length:
        raise UsageError(f"arc length {s} outside [0, {curve.total_length}]")
    if curve.kind == "circle":
        r = curve.radius
        p = np.zeros(curve.dimension)
        p[0], p[1] = r * math.cos(s / r), r * math.sin(s / r)
        return p
    cum = curve.cum_length
    i = min(int(np.searchsorted(cum, s, side="right")) - 1, curve.n_edges - 1)
    a, b = curve.edges[i]
    seg = cum[i + 1] - cum[i]
    u = (s - cum[i]) / seg if seg > 0 else 0.0
    return curve.vertices[a] + u * (curve.vertices[b] - curve.vertices[a])


PROCESS_KINDS = ("segment", "pearson", "tree", "circle", "line")


@dataclass(frozen=True)
class CurveProcess:
    """A family of curves, fixed or random, described by a JSON-able descriptor.

    ``length`` is a number or a :class:`StepLengthLaw` for randomized lengths.
    """

    kind: str
    dimension: int = 2
    length: float | StepLengthLaw | None = None
    step: StepLengthLaw | None = None
    branches: int = 1
    radius: float = 0.0

    def __post_init__(self):
        if self.kind not in PROCESS_KINDS:
            raise UsageError(f"unknown process {self.kind!r}; supported: {', '.join(PROCESS_KINDS)}")
        if self.kind in ("segment", "pearson") and self.length is None:
            raise UsageError(f"{self.kind} process needs a length")
        if self.kind in ("pearson", "tree") and self.step is None:
            raise UsageError(f"{self.kind} process needs a step law")

    @property
    def deterministic(self) -> bool:
        return self.kind in ("circle", "line") or (
            self.kind == "segment" and not isinstance(self.length, StepLengthLaw)
        )

    @property
    def mean_length(self) -> float:
        if self.kind == "line":
            return math.inf
        if self.kind == "circle":
            return 2.0 * math.pi * self.radius
        if self.kind == "tree":
            return self.branches * self.step.mean
        if isinstance(self.length, StepLengthLaw):
            return self.length.mean
        return float(self.length)

    def with_length(self, length: float) -> "CurveProcess":
        return CurveProcess(self.kind, self.dimension, length, self.step, self.branches, self.radius)

    def draw(self, rng: np.random.Generator) -> Curve:
        if self.kind == "circle":
            return make_circle_loop(self.radius, self.dimension)
        if self.kind == "line":
            return make_line(self.dimension)
        if self.kind == "tree":
            return make_ramified_tree(rng, self.branches, self.step, self.dimension)
        length = self.length
        if isinstance(length, StepLengthLaw):
            length = float(length.sample(rng, 1)[0])
        if self.kind == "segment":
            return make_segment(length, self.dimension)
        return make_pearson_walk(rng, self.step, length, self.dimension)

    def to_descriptor(self) -> dict[str, Any]:
        d: dict[str, Any] = {"curve": self.kind}
        if self.dimension != 2:
            d["dimension"] = self.dimension
        if self.length is not None:
            d["length"] = self.length.to_descriptor() if isinstance(self.length, StepLengthLaw) else self.length
        if self.step is not None:
            d["step"] = self.step.to_descriptor()
        if self.kind == "tree":
            d["branches"] = self.branches
        if self.kind == "circle":
            d["radius"] = self.radius
        return d

    @classmethod
    def from_descriptor(cls, desc: dict[str, Any]) -> "CurveProcess":
        kind = desc.get("curve")
        length = desc.get("length")
        if isinstance(length, dict):
            length = StepLengthLaw.from_descriptor(length)
        step = desc.get("step")
        if step is not None:
            step = StepLengthLaw.from_descriptor(step)
        return cls(
            kind,
            int(desc.get("dimension", 2)),
            length=length,
            step=step,
            branches=int(desc.get("branches", 1)),
            radius=float(desc.get("radius", 0.0)),
        )


def segment_process(length, dimension: int = 2) -> CurveProcess:
    return CurveProcess("segment", dimension, length=length)


def pearson_process(step: StepLengthLaw, length, dimension: int = 2) -> CurveProcess:
    return CurveProcess("pearson", dimension, length=length, step=step)


def tree_process(branches: int, edge_law: StepLengthLaw, dimension: int = 2) -> CurveProcess:
    return CurveProcess("tree", dimension, step=edge_law, branches=branches)


def circle_process(radius: float, dimension: int = 2) -> CurveProcess:
    return CurveProcess("circle", dimension, radius=radius)


def line_process(dimension: int = 2) -> CurveProcess:
    return CurveProcess("line", dimension)
