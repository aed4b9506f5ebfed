"""Pure-numpy batch kernel, used when the compiled extension is unavailable.

For every motion the placed graph (vertices + straight edges) is cut by the
body boundary.  Inside pieces are counted as connected components of the
inside subgraph, which for an acyclic graph is

    chi = (#inside vertices) - (#edges fully inside) + (#inside sub-intervals
          touching neither endpoint)

This equals the number of arc pieces for polylines, the number of connected
inside sub-trees for trees, and follows the loop convention (0 when fully
inside) for closed polylines.
"""

from __future__ import annotations

import numpy as np

from .bodies import KIND_BOX, KIND_POLYGON, KIND_SHELL, TANGENCY_TOL

# cap on M * E * K floats held at once
_MAX_CELLS = 4_000_000


def contains_many(kind: int, params: np.ndarray, poly: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Vectorized closed-region membership for points ``x[..., n]``."""
    if kind == KIND_SHELL:
        r2 = np.einsum("...i,...i->...", x, x)
        return (params[0] ** 2 <= r2) & (r2 <= params[1] ** 2)
    if kind == KIND_BOX:
        return np.all(np.abs(x) <= params, axis=-1)
    px, py = x[..., 0], x[..., 1]
    inside = np.zeros(px.shape, dtype=bool)
    m = len(poly)
    for i in range(m):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % m]
        straddle = (y0 > py) != (y1 > py)
        if not np.any(straddle):
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
        inside ^= straddle & (px < xc)
    return inside


def _sphere_params(a, d, r):
    aa = np.einsum("...i,...i->...", d, d)
    bb = np.einsum("...i,...i->...", a, d)
    cc = np.einsum("...i,...i->...", a, a) - r * r
    disc = bb * bb - aa * cc
    ok = disc > TANGENCY_TOL * aa * r * r
    sq = np.sqrt(np.where(ok, disc, 0.0))
    out = []
    for sign in (-1.0, 1.0):
        t = (-bb + sign * sq) / aa
        out.append(np.where(ok & (t > 0.0) & (t < 1.0), t, np.inf))
    return out


def crossing_params(kind, params, poly, a, d) -> np.ndarray:
    """Crossing parameters of segments a + t d, shape (..., K), missing = inf."""
    if kind == KIND_SHELL:
        cols = _sphere_params(a, d, params[1])
        if params[0] > 0:
            cols += _sphere_params(a, d, params[0])
        return np.stack(cols, axis=-1)
    if kind == KIND_BOX:
        h = params
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (-h - a) / d
            t2 = (h - a) / d
        par = d == 0.0
        blocked = np.any(par & (np.abs(a) > h), axis=-1)
        lo = np.where(par, -np.inf, np.minimum(t1, t2)).max(axis=-1)
        hi = np.where(par, np.inf, np.maximum(t1, t2)).min(axis=-1)
        ok = ~blocked & (hi - lo > TANGENCY_TOL)
        c0 = np.where(ok & (lo > 0.0) & (lo < 1.0), lo, np.inf)
        c1 = np.where(ok & (hi > 0.0) & (hi < 1.0), hi, np.inf)
        return np.stack([c0, c1], axis=-1)
    q0 = poly
    e = np.roll(poly, -1, axis=0) - poly
    dx, dy = d[..., None, 0], d[..., None, 1]
    denom = dx * e[:, 1] - dy * e[:, 0]
    dn = np.hypot(d[..., 0], d[..., 1])[..., None]
    en = np.hypot(e[:, 0], e[:, 1])
    wx = q0[:, 0] - a[..., None, 0]
    wy = q0[:, 1] - a[..., None, 1]
    ok = np.abs(denom) > TANGENCY_TOL * dn * en
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (wx * e[:, 1] - wy * e[:, 0]) / denom
        u = (wx * dy - wy * dx) / denom
    hit = ok & (t > 0.0) & (t < 1.0) & (u >= 0.0) & (u < 1.0)
    return np.where(hit, t, np.inf)


def _tally_chunk(verts, edges, rots, trans, kind, params, poly):
    placed = np.einsum("mij,vj->mvi", rots, verts) + trans[:, None, :]
    vin = contains_many(kind, params, poly, placed)
    a = placed[:, edges[:, 0]]
    d = placed[:, edges[:, 1]] - a
    t = np.sort(crossing_params(kind, params, poly, a, d), axis=-1)
    k = np.isfinite(t).sum(axis=-1)
    s = vin[:, edges[:, 0]]
    bounds = np.concatenate(
        [np.zeros(t.shape[:-1] + (1,)), np.where(np.isfinite(t), t, 1.0), np.ones(t.shape[:-1] + (1,))],
        axis=-1,
    )
    lens = np.diff(bounds, axis=-1)
    parity = (np.arange(lens.shape[-1]) & 1).astype(bool)
    state = s[..., None] ^ parity
    seglen = np.sqrt(np.einsum("...i,...i->...", d, d))
    inside_len = ((lens * state).sum(-1) * seglen).sum(-1)
    full = ((k == 0) & s).sum(-1)
    interior = np.where(s, np.maximum(k - 1, 0) // 2, k // 2).sum(-1)
    nin = vin.sum(-1)
    chi = nin - full + interior
    return inside_len, chi.astype(np.int64), k.sum(-1).astype(np.int64), nin.astype(np.int64)


def tally_graph(verts, edges, rots, trans, kind, params, poly,
                block_start=None, block_center=None, block_radius=None, body_radius=None):
    """Per-motion (inside_length, chi, crossings, n_inside_vertices).

    The block arguments exist for signature parity with the compiled kernel
    and are ignored here.
    """
    M = len(rots)
    K = 4 if kind == KIND_SHELL else (2 if kind == KIND_BOX else len(poly))
    per = max(1, len(edges) * (K + 2) * verts.shape[1])
    step = max(1, _MAX_CELLS // per)
    outs = [_tally_chunk(verts, edges, rots[i:i + step], trans[i:i + step], kind, params, poly)
            for i in range(0, M, step)]
    if not outs:
        z = np.zeros(0, dtype=np.int64)
        return np.zeros(0), z, z.copy(), z.copy()
    return tuple(np.concatenate(parts) for parts in zip(*outs))
