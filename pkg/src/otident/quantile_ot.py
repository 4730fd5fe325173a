"""Univariate optimal transport by monotone rearrangement.

For costs of the form ``-v*w`` (or any supermodular cost) the optimal coupling
of two univariate laws pairs equal quantile ranks, so transport costs reduce to
integrals over ``u in (0, 1]`` of products of step quantile functions.  The
workhorse here is :func:`coupled_segments`, which merges the breakpoints of
several pairs of step quantiles at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidArgument
from .measures import DiscreteDist

SEGMENT_TOL = 1e-15


@dataclass(frozen=True, eq=False)
class StepQuantile:
    """Left-continuous step quantile: ``value[k]`` on ``(u_upper[k-1], u_upper[k]]``."""

    u_upper: np.ndarray
    values: np.ndarray

    @property
    def breakpoints(self) -> list[tuple[float, float]]:
        return list(zip(self.u_upper.tolist(), self.values.tolist()))

    def __call__(self, u):
        idx = np.searchsorted(self.u_upper, np.asarray(u, dtype=float), side="left")
        return self.values[np.minimum(idx, self.values.size - 1)]


def to_step_quantile(d: DiscreteDist) -> StepQuantile:
    cum = np.cumsum(d.probs)
    cum[-1] = 1.0
    keep = d.probs > 0
    return StepQuantile(cum[keep], d.values[keep].copy())


def _sorted_rows(values, probs):
    values = np.atleast_2d(np.asarray(values, dtype=float))
    probs = np.broadcast_to(np.atleast_2d(np.asarray(probs, dtype=float)), values.shape)
    order = np.argsort(values, axis=1, kind="stable")
    v = np.take_along_axis(values, order, axis=1)
    p = np.take_along_axis(probs, order, axis=1)
    cum = np.cumsum(p, axis=1)
    cum /= cum[:, -1:]
    cum[:, -1] = 1.0
    return v, cum


def coupled_segments(values_a, probs_a, values_b, probs_b):
    """Merged quantile segments for a batch of law pairs.

    Each argument is ``(rows, atoms)``; row ``r`` of ``a`` is coupled
    comonotonically with row ``r`` of ``b``.  Atoms need not be sorted and
    probabilities need only be proportional within a row.

    Returns ``(lengths, va, vb)`` of shape ``(rows, na + nb)``: on a segment of
    length ``lengths[r, k]`` the two quantile functions take values
    ``va[r, k]`` and ``vb[r, k]``.  Segments shorter than 1e-15 get length 0.
    """
    va, cum_a = _sorted_rows(values_a, probs_a)
    vb, cum_b = _sorted_rows(values_b, probs_b)
    if va.shape[0] != vb.shape[0]:
        raise InvalidArgument("batches must have the same number of rows")
    rows, na = va.shape
    nb = vb.shape[1]
    upper = np.sort(np.concatenate([cum_a, cum_b], axis=1), axis=1)
    lower = np.concatenate([np.zeros((rows, 1)), upper[:, :-1]], axis=1)
    lengths = upper - lower
    lengths[lengths < SEGMENT_TOL] = 0.0
    mid = 0.5 * (upper + lower)
    # row offsets turn the per-row searches into one global sorted search
    offset = 2.0 * np.arange(rows)[:, None]
    ia = np.searchsorted((cum_a + offset).ravel(), (mid + offset).ravel()).reshape(rows, -1)
    ib = np.searchsorted((cum_b + offset).ravel(), (mid + offset).ravel()).reshape(rows, -1)
    ia = np.clip(ia - na * np.arange(rows)[:, None], 0, na - 1)
    ib = np.clip(ib - nb * np.arange(rows)[:, None], 0, nb - 1)
    return lengths, np.take_along_axis(va, ia, axis=1), np.take_along_axis(vb, ib, axis=1)


def comonotone_batch(values_a, probs_a, values_b, probs_b) -> np.ndarray:
    """Row-wise ``int_0^1 F_a^{-1}(u) F_b^{-1}(u) du``."""
    values_a = np.atleast_2d(np.asarray(values_a, dtype=float))
    values_b = np.atleast_2d(np.asarray(values_b, dtype=float))
    probs_a = np.atleast_2d(np.asarray(probs_a, dtype=float))
    probs_b = np.atleast_2d(np.asarray(probs_b, dtype=float))
    n = values_a.shape[1]
    if (
        values_b.shape[1] == n
        and probs_a.shape[1] == n
        and probs_b.shape[1] == n
        and np.all(probs_a == probs_a[:, :1])
        and np.all(probs_b == probs_b[:, :1])
    ):
        # equal-weight atoms on both sides: sorted dot product
        return np.mean(np.sort(values_a, axis=1) * np.sort(values_b, axis=1), axis=1)
    lengths, va, vb = coupled_segments(values_a, probs_a, values_b, probs_b)
    return np.sum(lengths * va * vb, axis=1)


def comonotone_integral(v: DiscreteDist, w: DiscreteDist) -> float:
    lengths, va, vb = coupled_segments(v.values, v.probs, w.values, w.probs)
    return float(np.sum(lengths * va * vb))


def antitone_integral(v: DiscreteDist, w: DiscreteDist) -> float:
    """``int_0^1 F_v^{-1}(u) F_w^{-1}(1-u) du``, the minimum of E[VW]."""
    lengths, va, vb = coupled_segments(v.values, v.probs, -w.values, w.probs)
    return float(-np.sum(lengths * va * vb))


def coupled_expectation(
    h: Callable[[np.ndarray, np.ndarray], np.ndarray],
    v: DiscreteDist,
    w: DiscreteDist,
    antitone: bool = False,
) -> float:
    """E[h(V, W)] under the comonotone (or antitone) coupling of v and w."""
    if antitone:
        lengths, va, vb = coupled_segments(v.values, v.probs, -w.values, w.probs)
        vb = -vb
    else:
        lengths, va, vb = coupled_segments(v.values, v.probs, w.values, w.probs)
    vals = np.asarray(h(va, vb), dtype=float)
    return float(np.sum(np.where(lengths > 0, lengths * vals, 0.0)))


def frechet_bounds(p_a: float, p_b: float) -> tuple[float, float]:
    """Sharp bounds on Pr(A and B) given Pr(A) and Pr(B)."""
    for p in (p_a, p_b):
        if not 0.0 <= p <= 1.0:
            raise InvalidArgument(f"probability {p!r} outside [0, 1]")
    return max(p_a + p_b - 1.0, 0.0), min(p_a, p_b)
