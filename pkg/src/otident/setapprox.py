"""Identified-set approximation by direction sampling and halfspace filtering.

A closed convex set is the intersection of the halfspaces ``q.theta <= h(q)``
over all directions ``q``.  Sampling finitely many directions gives an outer
approximation; sampling candidate points and keeping those that satisfy every
sampled halfspace gives a point cloud for plotting and diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import EmptySet, InvalidArgument

DEFAULT_TOL = 1e-9
DEFAULT_DIRECTIONS = 2000
DEFAULT_CANDIDATES = 20000
_CHUNK = 4096


@dataclass(frozen=True, eq=False)
class Halfspace:
    """``normal . theta <= offset``."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = np.array(self.normal, dtype=float).ravel()
        if not np.linalg.norm(normal) > 0:
            raise InvalidArgument("halfspace normal must be non-zero")
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))

    def contains(self, theta, tol: float = DEFAULT_TOL) -> bool:
        return float(self.normal @ np.asarray(theta, dtype=float)) <= self.offset + tol


@dataclass(frozen=True, eq=False)
class HalfspaceStack:
    """Many halfspaces stored as one ``(m, d)`` normal matrix and ``(m,)`` offsets."""

    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        normals = np.atleast_2d(np.array(self.normals, dtype=float))
        offsets = np.array(self.offsets, dtype=float).ravel()
        if normals.shape[0] != offsets.size:
            raise InvalidArgument("one offset per normal is required")
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)

    @classmethod
    def empty(cls, d: int) -> "HalfspaceStack":
        return cls(np.zeros((0, d)), np.zeros(0))

    @classmethod
    def from_halfspaces(cls, items: Sequence[Halfspace], d: int | None = None) -> "HalfspaceStack":
        items = list(items)
        if not items:
            if d is None:
                raise InvalidArgument("dimension needed for an empty stack")
            return cls.empty(d)
        return cls(np.stack([h.normal for h in items]), np.array([h.offset for h in items]))

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    def __len__(self):
        return self.offsets.size

    def __iter__(self):
        for n, o in zip(self.normals, self.offsets):
            yield Halfspace(n, o)

    def finite(self) -> "HalfspaceStack":
        """Drop halfspaces with infinite offset (they constrain nothing)."""
        keep = np.isfinite(self.offsets)
        return HalfspaceStack(self.normals[keep], self.offsets[keep])

    def concat(self, other: "HalfspaceStack") -> "HalfspaceStack":
        return HalfspaceStack(np.vstack([self.normals, other.normals]), np.concatenate([self.offsets, other.offsets]))


@dataclass(frozen=True, eq=False)
class IdentifiedSetApprox:
    candidates: np.ndarray
    halfspaces: HalfspaceStack
    accepted: np.ndarray
    tol: float

    @property
    def dim(self) -> int:
        return self.candidates.shape[1]

    @property
    def accepted_points(self) -> np.ndarray:
        return self.candidates[self.accepted]


def _unit_rows(g):
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sample_sphere(d: int, n: int, seed: int) -> np.ndarray:
    """``n`` directions uniform on the unit sphere in ``R^d`` (normalized Gaussians)."""
    if d < 1 or n < 1:
        raise InvalidArgument("need d >= 1 and n >= 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, d))
    # a Gaussian row of exact zeros has probability zero; redraw defensively
    while np.any(np.all(g == 0, axis=1)):
        bad = np.all(g == 0, axis=1)
        g[bad] = rng.standard_normal((int(bad.sum()), d))
    return _unit_rows(g)


def restricted_directions(d0: int, dx: int, n: int, seed: int) -> np.ndarray:
    """Unit directions whose first ``d0`` coordinates have at most one non-zero.

    The same Gaussian draw as :func:`sample_sphere` is made; in each row a
    single ``t0`` coordinate (chosen uniformly) is kept and the others are
    zeroed.  With ``d0 == 1`` the output equals ``sample_sphere(1 + dx, ...)``.
    """
    if d0 < 1 or dx < 0 or n < 1:
        raise InvalidArgument("need d0 >= 1, dx >= 0 and n >= 1")
    d = d0 + dx
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, d))
    if d0 > 1:
        keep = rng.integers(0, d0, size=n)
        mask = np.zeros((n, d0), dtype=bool)
        mask[np.arange(n), keep] = True
        g[:, :d0] = np.where(mask, g[:, :d0], 0.0)
    return _unit_rows(g)


def uniform_box(lower, upper, n: int, seed: int) -> np.ndarray:
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    rng = np.random.default_rng(seed)
    return lower + (upper - lower) * rng.random((n, lower.size))


def grid_2d(lower, upper, side: int) -> np.ndarray:
    """``side x side`` grid over a rectangle, row-major in the second coordinate."""
    xs = np.linspace(lower[0], upper[0], side)
    ys = np.linspace(lower[1], upper[1], side)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


def violations(candidates, halfspaces: HalfspaceStack) -> np.ndarray:
    """Largest ``normal . theta - offset`` per candidate (``-inf`` with no halfspaces)."""
    candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
    hs = halfspaces.finite()
    if candidates.shape[1] != halfspaces.dim:
        raise InvalidArgument(f"candidates have dimension {candidates.shape[1]}, halfspaces {halfspaces.dim}")
    out = np.full(candidates.shape[0], -np.inf)
    if len(hs) == 0:
        return out
    for start in range(0, candidates.shape[0], _CHUNK):
        block = candidates[start : start + _CHUNK]
        out[start : start + _CHUNK] = np.max(block @ hs.normals.T - hs.offsets, axis=1)
    return out


def filter_candidates(candidates, halfspaces: HalfspaceStack, tol: float = DEFAULT_TOL) -> IdentifiedSetApprox:
    """Keep candidates that satisfy every halfspace up to ``tol``."""
    if tol < 0:
        raise InvalidArgument("tolerance must be non-negative")
    candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
    accepted = violations(candidates, halfspaces) <= tol
    return IdentifiedSetApprox(candidates, halfspaces, accepted, tol)


# --- diagnostics ---------------------------------------------------------------


def convex_hull_2d(points) -> np.ndarray:
    """Counter-clockwise hull vertices by Andrew's monotone chain."""
    pts = np.unique(np.asarray(points, dtype=float).reshape(-1, 2), axis=0)
    if pts.shape[0] <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def polygon_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    if v.shape[0] < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


@dataclass(frozen=True)
class Diagnostics:
    accepted_count: int
    hull_area_2d: float | None
    _points: np.ndarray = field(repr=False)

    def functional_interval(self, c) -> tuple[float, float]:
        """Empirical ``(min, max)`` of ``c . theta`` over accepted points."""
        if self.accepted_count == 0:
            raise EmptySet("no accepted candidates")
        c = np.asarray(c, dtype=float)
        if c.size != self._points.shape[1]:
            raise InvalidArgument("functional has the wrong dimension")
        vals = self._points @ c
        return float(vals.min()), float(vals.max())


def diagnostics(approx: IdentifiedSetApprox) -> Diagnostics:
    pts = approx.accepted_points
    if pts.shape[0] == 0:
        raise EmptySet(f"none of {approx.candidates.shape[0]} candidates satisfies the {len(approx.halfspaces)} halfspaces")
    area = polygon_area(convex_hull_2d(pts)) if approx.dim == 2 else None
    return Diagnostics(int(pts.shape[0]), area, pts)


def containment_violations(inner: IdentifiedSetApprox, outer: IdentifiedSetApprox) -> int:
    """Candidates accepted by ``inner`` but rejected by ``outer`` (same candidate list)."""
    if inner.candidates.shape != outer.candidates.shape or not np.array_equal(inner.candidates, outer.candidates):
        raise InvalidArgument("containment needs identical candidate lists")
    return int(np.sum(inner.accepted & ~outer.accepted))


def project_support(halfspaces: HalfspaceStack, directions, coords: Sequence[int]) -> np.ndarray:
    """Support of the projection of ``{theta : halfspaces}`` onto ``coords``.

    One linear program per direction; unbounded directions give ``+inf``.
    Raises :class:`EmptySet` when the halfspaces have no common point.
    """
    hs = halfspaces.finite()
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    coords = list(coords)
    if dirs.shape[1] != len(coords):
        raise InvalidArgument("direction length must match the number of projected coordinates")
    out = np.empty(dirs.shape[0])
    bounds = [(None, None)] * hs.dim
    for i, q in enumerate(dirs):
        c = np.zeros(hs.dim)
        c[coords] = -q
        res = linprog(c, A_ub=hs.normals, b_ub=hs.offsets, bounds=bounds, method="highs")
        if res.status == 2:
            raise EmptySet("the halfspaces have empty intersection")
        if res.status == 3:
            out[i] = np.inf
        elif res.status != 0:
            raise RuntimeError(f"projection LP failed: {res.message}")
        else:
            out[i] = -res.fun
    return out
