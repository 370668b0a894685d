"""Integration over the alcove simplex and its facets; Gram matrices.

The deterministic rule subdivides the alcove into 2^(depth*n) congruent
subsimplices (Kuhn subdivision of a uniformly refined cube lattice) and
applies a fixed symmetric interior rule per cell: the n+1 points obtained by
shrinking the cell vertices toward the centroid by 1/sqrt(n+2), with equal
weights.  That rule is exact for quadratics (cubics in one dimension) and
keeps every weight positive.  The Monte Carlo rule samples the simplex
uniformly through normalized exponential spacings from a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .baesolver import BaeSolution, Coupling
from .eigenfn import BetheWave, WallSample, wall_normal
from .rootsys import RootSystem, WeylGroup, alcove_vertices

__all__ = [
    "QuadratureRule",
    "GramResult",
    "volume",
    "build_rule",
    "integrate",
    "gram_matrix",
    "facet_samples",
    "interior_points",
    "barycentric_lattice",
    "resolution_depth",
]

_Z_CHUNK = 1 << 19


def volume(rs: RootSystem) -> float:
    """Euclidean volume of the alcove simplex from its vertex matrix."""
    verts = alcove_vertices(rs)
    edges = verts[1:] - verts[0]
    return abs(float(np.linalg.det(edges))) / math.factorial(rs.dim)


def alcove_diameter(rs: RootSystem) -> float:
    verts = alcove_vertices(rs)
    diffs = verts[:, None, :] - verts[None, :, :]
    return float(np.sqrt((diffs**2).sum(-1)).max())


def resolution_depth(rs: RootSystem, oscillation: float) -> int:
    """Smallest depth whose cell diameter resolves one unit of phase.

    `oscillation` is the norm of the largest spectral point appearing in the
    integrand; the rule of thumb is oscillation * cell_diameter <= 1.
    """
    target = max(1.0, oscillation * alcove_diameter(rs))
    return max(0, math.ceil(math.log2(target)))


@dataclass(eq=False)
class QuadratureRule:
    """Nodes and positive weights over the closed alcove; weights sum to |A|."""

    kind: str                 # "subdivision-gauss" | "monte-carlo"
    nodes: np.ndarray         # (N, n)
    weights: np.ndarray       # (N,)
    rs: RootSystem
    depth: int | None = None
    count: int | None = None
    seed: int | None = None
    metadata: dict = field(default_factory=dict)
    _coarse: "QuadratureRule | None" = field(default=None, repr=False)

    def coarser(self) -> "QuadratureRule | None":
        """One-level-coarser companion rule used for error estimates."""
        if self.kind != "subdivision-gauss" or self.depth is None or self.depth == 0:
            return None
        if self._coarse is None:
            self._coarse = build_rule(self.rs, self.kind, depth=self.depth - 1)
        return self._coarse


def _kuhn_cells(n: int, h: int) -> np.ndarray:
    """Vertex arrays (cells, n+1, n) of the h^n Kuhn subsimplices of the
    ordered simplex {1 >= y_1 >= ... >= y_n >= 0}, scaled to [0, 1]."""
    axes = [np.arange(h, dtype=np.int32)] * n
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    kept = []
    for sigma in permutations(range(n)):
        offsets = np.zeros((n + 1, n), dtype=np.int32)
        for j, axis in enumerate(sigma):
            offsets[j + 1 :, axis] += 1
        for lo in range(0, len(grid), _Z_CHUNK):
            block = grid[lo : lo + _Z_CHUNK]
            verts = block[:, None, :] + offsets[None, :, :]  # (b, n+1, n)
            ok = np.all(verts[:, :, :-1] >= verts[:, :, 1:], axis=(1, 2))
            if ok.any():
                kept.append(verts[ok])
    cells = np.concatenate(kept, axis=0)
    if len(cells) != h**n:
        raise AssertionError(f"Kuhn subdivision produced {len(cells)} cells, expected {h**n}")
    return cells.astype(float) / h


def _ordered_to_barycentric(y: np.ndarray) -> np.ndarray:
    """Map ordered coordinates (…, n) to barycentric coordinates (…, n+1)."""
    n = y.shape[-1]
    b = np.empty(y.shape[:-1] + (n + 1,))
    b[..., 0] = 1.0 - y[..., 0]
    for j in range(1, n):
        b[..., j] = y[..., j - 1] - y[..., j]
    b[..., n] = y[..., n - 1]
    return b


def build_rule(rs: RootSystem, kind: str = "subdivision-gauss", depth: int = 4, count: int = 10000, seed: int = 0) -> QuadratureRule:
    """Construct a quadrature rule over the closed alcove.

    kind="subdivision-gauss": uniform simplex subdivision at 2^depth per edge
    with the fixed symmetric per-cell rule (depth >= 0).
    kind="monte-carlo": `count` uniform samples (count >= 1) from `seed`.
    """
    verts = alcove_vertices(rs)
    n = rs.dim
    vol = volume(rs)
    if kind == "subdivision-gauss":
        if depth < 0:
            raise ValueError(f"subdivision depth must be >= 0, got {depth}")
        h = 2**depth
        cells_bary = _ordered_to_barycentric(_kuhn_cells(n, h))  # (cells, n+1, n+1)
        cell_verts = cells_bary @ verts  # (cells, n+1, n)
        centroid = cell_verts.mean(axis=1, keepdims=True)
        shrink = 1.0 / math.sqrt(n + 2)
        nodes = centroid + (cell_verts - centroid) * shrink
        nodes = nodes.reshape(-1, n)
        ncells = len(cell_verts)
        weights = np.full(len(nodes), vol / (ncells * (n + 1)))
        meta = {"kind": kind, "depth": depth, "cells": ncells, "nodes": len(nodes), "volume": vol}
        return QuadratureRule(kind=kind, nodes=nodes, weights=weights, rs=rs, depth=depth, metadata=meta)
    if kind == "monte-carlo":
        if count < 1:
            raise ValueError(f"Monte Carlo node count must be >= 1, got {count}")
        rng = np.random.default_rng(np.uint64(seed))
        # normalized exponential spacings are uniform barycentric coordinates
        e = rng.standard_exponential((count, n + 1))
        bary = e / e.sum(axis=1, keepdims=True)
        nodes = bary @ verts
        weights = np.full(count, vol / count)
        meta = {"kind": kind, "count": count, "seed": int(seed), "volume": vol}
        return QuadratureRule(kind=kind, nodes=nodes, weights=weights, rs=rs, count=count, seed=int(seed), metadata=meta)
    raise ValueError(f"unknown quadrature kind {kind!r}")


def _evaluate(f, nodes: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(f(nodes))
        if vals.shape == (len(nodes),):
            return vals
    except Exception:
        pass
    return np.asarray([f(x) for x in nodes])


def integrate(rule: QuadratureRule, f):
    """Integral of f over the alcove with an error estimate.

    Deterministic rules estimate the error as the difference against the
    one-level-coarser rule (infinite at depth 0); Monte Carlo rules report
    the weighted standard error.  f may be vectorized over a batch of points
    or accept a single point.
    """
    vals = _evaluate(f, rule.nodes)
    value = complex(rule.weights @ vals)
    if rule.kind == "monte-carlo":
        vol = float(rule.weights.sum())
        spread = np.var(vals.real, ddof=1) + (np.var(vals.imag, ddof=1) if np.iscomplexobj(vals) else 0.0)
        err = vol * math.sqrt(spread / len(vals))
    else:
        coarse = rule.coarser()
        if coarse is None:
            err = math.inf
        else:
            err = abs(value - complex(coarse.weights @ _evaluate(f, coarse.nodes)))
    if not np.iscomplexobj(vals):
        return value.real, err
    return value, err


@dataclass(eq=False)
class GramResult:
    """Inner-product matrix of a list of Bethe waves over the alcove."""

    matrix: np.ndarray   # (N, N) complex, Hermitian
    errors: np.ndarray   # (N, N) per-entry quadrature error estimate
    solutions: list

    def normalized(self) -> np.ndarray:
        d = np.sqrt(np.real(np.diag(self.matrix)))
        return self.matrix / np.outer(d, d)

    def max_offdiagonal(self) -> float:
        g = self.normalized().copy()
        np.fill_diagonal(g, 0.0)
        return float(np.max(np.abs(g))) if len(g) > 1 else 0.0


def _gram_on(rule: QuadratureRule, waves) -> np.ndarray:
    F = np.array([w.at(rule.nodes) for w in waves])
    return (F * rule.weights) @ F.conj().T


def gram_matrix(rs: RootSystem, weyl: WeylGroup, k: Coupling, solutions, rule: QuadratureRule) -> GramResult:
    """Numerical Gram matrix of the eigenfunctions of the given solutions."""
    seen = set()
    for sol in solutions:
        if sol.mu.coeffs in seen:
            raise ValueError(f"duplicate weight {sol.mu.coeffs} in Gram computation")
        seen.add(sol.mu.coeffs)
    waves = [BetheWave(rs, weyl, k, sol.lam) for sol in solutions]
    G = _gram_on(rule, waves)
    if rule.kind == "monte-carlo":
        F = np.array([w.at(rule.nodes) for w in waves])
        prod = F[:, None, :] * F.conj()[None, :, :]
        vol = float(rule.weights.sum())
        spread = np.var(prod.real, axis=-1, ddof=1) + np.var(prod.imag, axis=-1, ddof=1)
        errors = vol * np.sqrt(spread / prod.shape[-1])
    else:
        coarse = rule.coarser()
        errors = np.full(G.shape, math.inf) if coarse is None else np.abs(G - _gram_on(coarse, waves))
    return GramResult(matrix=G, errors=errors, solutions=list(solutions))


def barycentric_lattice(resolution: int, parts: int):
    """All nonnegative integer tuples of the given length summing to `resolution`,
    in lexicographic order."""
    if parts == 1:
        yield (resolution,)
        return
    for head in range(resolution + 1):
        for rest in barycentric_lattice(resolution - head, parts - 1):
            yield (head,) + rest


def _lattice_size(resolution: int, parts: int) -> int:
    return math.comb(resolution + parts - 1, parts - 1)


def facet_samples(rs: RootSystem, wall_index: int, count: int) -> list:
    """Quasi-uniform barycentric lattice of `count` points on one wall facet.

    The facet of wall i is spanned by every alcove vertex except the one
    opposite the wall (the origin for the affine wall i = 0).
    """
    n = rs.dim
    if not 0 <= wall_index <= n:
        raise ValueError(f"wall index must be in 0..{n}, got {wall_index}")
    if count < 1:
        raise ValueError(f"sample count must be >= 1, got {count}")
    verts = alcove_vertices(rs)
    facet = np.delete(verts, wall_index, axis=0)  # (n, dim)
    parts = n
    if parts == 1:
        res = 1  # zero-dimensional facet: the single vertex, repeated
        lattice = [(1,)]
    else:
        res = 1
        while _lattice_size(res, parts) < count:
            res += 1
        lattice = list(barycentric_lattice(res, parts))
    idx = np.floor(np.arange(count) * len(lattice) / count).astype(int)
    normal = wall_normal(rs, wall_index)
    samples = []
    for i in idx:
        bary = np.array(lattice[i], dtype=float) / res
        point = bary @ facet
        samples.append(WallSample(wall_index=wall_index, point=point, barycentric=tuple(bary), normal=normal))
    return samples


def all_wall_samples(rs: RootSystem, per_wall: int = 50) -> list:
    """Default wall sampling: `per_wall` facet points on each of the n+1 walls."""
    out = []
    for i in range(rs.dim + 1):
        out.extend(facet_samples(rs, i, per_wall))
    return out


def interior_points(rs: RootSystem, count: int, margin: float = 1e-3) -> np.ndarray:
    """Deterministic points at least `margin` inside every wall of the alcove."""
    verts = alcove_vertices(rs)
    n = rs.dim
    res = n + 2
    while True:
        pts = []
        for bary in barycentric_lattice(res, n + 1):
            b = np.array(bary, dtype=float) / res
            p = b @ verts
            if (rs.positive_roots @ p).min() > margin and (rs.highest_root @ p) < 1.0 - margin:
                pts.append(p)
        if len(pts) >= count:
            return np.array(pts[:count])
        res += 1
        if res > 200:
            raise RuntimeError("could not place the requested number of interior points")


def fixed_alcove_grid(rs: RootSystem, target: int = 1000) -> np.ndarray:
    """Deterministic closed-alcove grid with at least `target` points."""
    verts = alcove_vertices(rs)
    n = rs.dim
    res = 1
    while _lattice_size(res, n + 1) < target:
        res += 1
    bary = np.array(list(barycentric_lattice(res, n + 1)), dtype=float) / res
    return bary @ verts
