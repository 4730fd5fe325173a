"""Disparity measures when the decision and the protected class sit in different datasets.

The decision ``Y1`` (and, for true-positive rates, the true outcome) is
observed with covariates ``X`` in one sample; the protected class ``Y0`` with
``X`` in another.  Classes are indexed ``0..J-1`` throughout.

Demographic disparity (DD) works with ``theta_j = Pr(Y1 = 1 | Y0 = a_j)``.
True-positive-rate disparity (TPRD) works with the ``2J`` joint probabilities

    theta[2j]     = Pr(Y1s = 1, Y1r = 1, Y0 = a_j)
    theta[2j + 1] = Pr(Y1s = 0, Y1r = 1, Y0 = a_j)

and maps them to rate differences through a ratio map.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from ..dream import PartialOtInstance, solve_dream
from ..errors import DegenerateClass, DegenerateDenominator, InvalidArgument
from ..quantile_ot import comonotone_batch

PROB_TOL = 1e-10
DENOM_TOL = 1e-12


def _check_probability_table(class_given_x, n_rows):
    c = np.atleast_2d(np.array(class_given_x, dtype=float))
    if c.shape[0] != n_rows:
        raise InvalidArgument("one class-probability vector per covariate row is required")
    if np.any(c < -PROB_TOL) or np.any(c > 1 + PROB_TOL):
        raise InvalidArgument("class probabilities must lie in [0, 1]")
    if np.abs(c.sum(axis=1) - 1.0).max() > PROB_TOL:
        raise InvalidArgument("class probabilities must sum to 1 in every covariate row")
    return np.clip(c, 0.0, 1.0)


def _check_weights(weights):
    w = np.array(weights, dtype=float).ravel()
    if w.size == 0 or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise InvalidArgument("covariate weights must be non-negative and sum to 1")
    return w


def _check_unit(p, k):
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if p.shape[-1] != k:
        raise InvalidArgument(f"direction must have {k} coordinates")
    if np.abs(np.linalg.norm(p, axis=-1) - 1.0).max() > 1e-10:
        raise InvalidArgument("direction must have unit norm")
    return p


@dataclass(frozen=True, eq=False)
class DisparityMatrix:
    """Contrast matrix whose rows are ``e_j - e_jdag``."""

    E: np.ndarray

    def __post_init__(self):
        E = np.atleast_2d(np.array(self.E, dtype=float))
        for k, row in enumerate(E):
            plus = np.flatnonzero(row == 1.0)
            minus = np.flatnonzero(row == -1.0)
            if plus.size != 1 or minus.size != 1 or np.count_nonzero(row) != 2:
                raise InvalidArgument(f"contrast row {k} must hold one +1, one -1 and zeros")
        object.__setattr__(self, "E", E)

    @property
    def K(self) -> int:
        return self.E.shape[0]

    @property
    def J(self) -> int:
        return self.E.shape[1]

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [(int(np.flatnonzero(r == 1.0)[0]), int(np.flatnonzero(r == -1.0)[0])) for r in self.E]

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[int, int]], J: int) -> "DisparityMatrix":
        E = np.zeros((len(pairs), J))
        for k, (j, jd) in enumerate(pairs):
            if j == jd or not (0 <= j < J and 0 <= jd < J):
                raise InvalidArgument(f"invalid class pair ({j}, {jd}) for J={J}")
            E[k, j], E[k, jd] = 1.0, -1.0
        return cls(E)

    @classmethod
    def against_last(cls, J: int) -> "DisparityMatrix":
        """Every class contrasted with the last one (``K = J - 1``)."""
        return cls.from_pairs([(j, J - 1) for j in range(J - 1)], J)

    @classmethod
    def all_pairs(cls, J: int) -> "DisparityMatrix":
        return cls.from_pairs(list(combinations(range(J), 2)), J)


# --- demographic disparity -----------------------------------------------------


class DdModel:
    """Per-covariate ``Pr(Y1 = 1 | x)`` and ``Pr(Y0 = a_j | x)`` on a weighted grid."""

    def __init__(self, weights, p_pos, class_given_x, class_probs=None):
        self.weights = _check_weights(weights)
        n = self.weights.size
        self.p_pos = np.array(p_pos, dtype=float).ravel()
        if self.p_pos.size != n or np.any(self.p_pos < 0) or np.any(self.p_pos > 1):
            raise InvalidArgument("p_pos needs one probability in [0, 1] per covariate row")
        self.class_given_x = _check_probability_table(class_given_x, n)
        mix = self.weights @ self.class_given_x
        if class_probs is not None:
            class_probs = np.array(class_probs, dtype=float).ravel()
            if class_probs.shape != mix.shape or np.abs(class_probs - mix).max() > PROB_TOL:
                raise InvalidArgument("class_probs must equal the weighted mix of per-row class probabilities")
        self.class_probs = mix

    @property
    def J(self) -> int:
        return self.class_given_x.shape[1]

    def require_positive_classes(self, classes=None):
        cp = self.class_probs if classes is None else self.class_probs[list(classes)]
        if np.any(cp <= DENOM_TOL):
            raise DegenerateClass("a protected class has zero probability")


def dd_support_batch(model: DdModel, E: DisparityMatrix, P) -> np.ndarray:
    """Support function of the DD measure set at each row of ``P`` (shape ``(k, K)``)."""
    if E.J != model.J:
        raise InvalidArgument("contrast matrix and model disagree on the number of classes")
    P = np.atleast_2d(_check_unit(P, E.K))
    model.require_positive_classes()
    q = (P @ E.E) / model.class_probs  # atom values of D_q, one row per direction
    k, n = q.shape[0], model.weights.size
    vals_b = np.repeat(q, n, axis=0)
    probs_b = np.tile(model.class_given_x, (k, 1))
    vals_a = np.tile([0.0, 1.0], (k * n, 1))
    probs_a = np.tile(np.column_stack([1.0 - model.p_pos, model.p_pos]), (k, 1))
    per_row = comonotone_batch(vals_a, probs_a, vals_b, probs_b).reshape(k, n)
    return per_row @ model.weights


def dd_support(model: DdModel, E: DisparityMatrix, p) -> float:
    return float(dd_support_batch(model, E, np.atleast_2d(p))[0])


def dd_interval(model: DdModel, j: int, jd: int) -> tuple[float, float]:
    """Sharp bounds on ``theta_j - theta_jdag``."""
    if j == jd:
        raise InvalidArgument("the two classes must differ")
    if not (0 <= j < model.J and 0 <= jd < model.J):
        raise InvalidArgument("class index out of range")
    model.require_positive_classes([j, jd])
    w, pa = model.weights, model.p_pos
    pb, pc = model.class_given_x[:, j], model.class_given_x[:, jd]
    pr_b, pr_c = model.class_probs[j], model.class_probs[jd]
    upper = w @ np.minimum(pa, pb) / pr_b - w @ np.maximum(pa + pc - 1.0, 0.0) / pr_c
    lower = w @ np.maximum(pa + pb - 1.0, 0.0) / pr_b - w @ np.minimum(pa, pc) / pr_c
    return float(lower), float(upper)


def dd_theta_bounds(model: DdModel) -> tuple[np.ndarray, np.ndarray]:
    """Per-class Frechet bounds ``(lower, upper)`` on ``theta_j``."""
    model.require_positive_classes()
    pa = model.p_pos[:, None]
    c = model.class_given_x
    lo = model.weights @ np.maximum(pa + c - 1.0, 0.0) / model.class_probs
    hi = model.weights @ np.minimum(pa, c) / model.class_probs
    return lo, hi


# --- true-positive-rate disparity ------------------------------------------------


class TprdModel:
    """Per-covariate ``Pr(Y1s = i, Y1r = 1 | x)`` for ``i = 0, 1`` and class probabilities."""

    def __init__(self, weights, p01, p11, class_given_x):
        self.weights = _check_weights(weights)
        n = self.weights.size
        self.p01 = np.array(p01, dtype=float).ravel()
        self.p11 = np.array(p11, dtype=float).ravel()
        for name, arr in (("p01", self.p01), ("p11", self.p11)):
            if arr.size != n or np.any(arr < 0) or np.any(arr > 1):
                raise InvalidArgument(f"{name} needs one probability in [0, 1] per covariate row")
        if np.any(self.p01 + self.p11 > 1.0 + 1e-12):
            raise InvalidArgument("p01 + p11 must not exceed 1")
        self.class_given_x = _check_probability_table(class_given_x, n)

    @property
    def J(self) -> int:
        return self.class_given_x.shape[1]

    @property
    def class_probs(self) -> np.ndarray:
        return self.weights @ self.class_given_x

    def instance(self, row: int, q) -> PartialOtInstance:
        """Partial transport problem at one covariate row for direction ``q``.

        Row 1 of ``pi`` is the ``Y1s = 1`` decision (even ``theta`` slots),
        row 0 the ``Y1s = 0`` decision (odd slots).
        """
        q = np.asarray(q, dtype=float)
        pi = np.vstack([-q[1::2], -q[0::2]])
        return PartialOtInstance(pi, [self.p01[row], self.p11[row]], self.class_given_x[row])


def tprd_theta_support(model: TprdModel, q) -> float:
    """Support function of the set of feasible ``theta`` (length ``2J``) at ``q``."""
    q = _check_unit(q, 2 * model.J)
    total = 0.0
    for r, w in enumerate(model.weights):
        if w == 0.0:
            continue
        total += w * solve_dream(model.instance(r, q)).cost
    return -total


def tprd_theta_support_batch(model: TprdModel, Q) -> np.ndarray:
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    return np.array([tprd_theta_support(model, q) for q in Q])


def tprd_frechet_bounds(model: TprdModel) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate-wise sharp ``(lower, upper)`` bounds on ``theta``."""
    c = model.class_given_x
    lo = np.empty(2 * model.J)
    hi = np.empty(2 * model.J)
    for slot, p in ((0, model.p11), (1, model.p01)):
        pp = p[:, None]
        lo[slot::2] = model.weights @ np.maximum(pp + c - 1.0, 0.0)
        hi[slot::2] = model.weights @ np.minimum(pp, c)
    return lo, hi


def tprd_map_batch(thetas, pairs: Sequence[tuple[int, int]]) -> tuple[np.ndarray, np.ndarray]:
    """Rate differences for many ``theta`` rows plus a mask of rows with valid denominators."""
    th = np.atleast_2d(np.asarray(thetas, dtype=float))
    if th.shape[1] % 2:
        raise InvalidArgument("theta must have an even number of entries")
    J = th.shape[1] // 2
    pos, neg = th[:, 0::2], th[:, 1::2]
    denom = pos + neg
    used = sorted({c for pair in pairs for c in pair})
    if any(not 0 <= c < J for c in used):
        raise InvalidArgument("class index out of range")
    ok = np.all(denom[:, used] > DENOM_TOL, axis=1) if used else np.ones(th.shape[0], dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = np.where(denom > DENOM_TOL, pos / np.where(denom > DENOM_TOL, denom, 1.0), np.nan)
    out = np.column_stack([rate[:, j] - rate[:, jd] for j, jd in pairs]) if pairs else np.zeros((th.shape[0], 0))
    return out, ok


def tprd_map(theta, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """``theta[2j] / (theta[2j] + theta[2j+1])`` minus the same ratio for ``jdag``, per pair."""
    out, ok = tprd_map_batch(np.atleast_2d(theta), pairs)
    if not ok[0]:
        raise DegenerateDenominator("a referenced class has theta[2j] + theta[2j+1] == 0")
    return out[0]


def _ratio(a, b):
    if a + b <= DENOM_TOL:
        raise DegenerateDenominator("vanishing denominator in a rate bound")
    return a / (a + b)


def tprd_interval(model: TprdModel, j: int, jd: int) -> tuple[float, float]:
    """Sharp bounds on the true-positive-rate difference between classes ``j`` and ``jd``."""
    if j == jd or not (0 <= j < model.J and 0 <= jd < model.J):
        raise InvalidArgument("need two distinct valid classes")
    lo, hi = tprd_frechet_bounds(model)
    upper = _ratio(hi[2 * j], lo[2 * j + 1]) - _ratio(lo[2 * jd], hi[2 * jd + 1])
    lower = _ratio(lo[2 * j], hi[2 * j + 1]) - _ratio(hi[2 * jd], lo[2 * jd + 1])
    return float(lower), float(upper)


def canonical_direction(J: int, j: int, jd: int, sign: float = 1.0) -> np.ndarray:
    """Unit direction favouring ``theta[2j]`` and ``theta[2jd+1]`` against the other two slots."""
    q = np.zeros(2 * J)
    q[2 * j], q[2 * j + 1] = 1.0, -1.0
    q[2 * jd], q[2 * jd + 1] = -1.0, 1.0
    return sign * q / 2.0


@dataclass(frozen=True)
class SupportRouteInterval:
    lower: float
    upper: float
    upper_point: np.ndarray
    lower_point: np.ndarray
    attainability_gap: float


def tprd_interval_via_support(model: TprdModel, j: int, jd: int) -> SupportRouteInterval:
    """TPRD bounds recomputed from support-function evaluations alone.

    Coordinate bounds come from ``h(+-e_k)``; the canonical directions check
    that the extreme coordinates are attained jointly (``attainability_gap``
    is the largest discrepancy).
    """
    if j == jd:
        raise InvalidArgument("the two classes must differ")
    J = model.J
    eye = np.eye(2 * J)

    def hi(k):
        return tprd_theta_support(model, eye[k])

    def lo(k):
        return -tprd_theta_support(model, -eye[k])

    up_pt = np.array([hi(2 * j), lo(2 * j + 1), lo(2 * jd), hi(2 * jd + 1)])
    lo_pt = np.array([lo(2 * j), hi(2 * j + 1), hi(2 * jd), lo(2 * jd + 1)])
    signs = np.array([1.0, -1.0, -1.0, 1.0]) / 2.0
    gap_up = abs(tprd_theta_support(model, canonical_direction(J, j, jd, 1.0)) - signs @ up_pt)
    gap_lo = abs(tprd_theta_support(model, canonical_direction(J, j, jd, -1.0)) + signs @ lo_pt)
    upper = _ratio(up_pt[0], up_pt[1]) - _ratio(up_pt[2], up_pt[3])
    lower = _ratio(lo_pt[0], lo_pt[1]) - _ratio(lo_pt[2], lo_pt[3])
    return SupportRouteInterval(float(lower), float(upper), up_pt, lo_pt, float(max(gap_up, gap_lo)))


def tprd_endpoint_theta(model: TprdModel, j: int, jd: int, which: str = "upper") -> np.ndarray:
    """Full ``theta`` vector at the Frechet extreme that attains an interval endpoint.

    Only defined for ``J == 2``, where the four slots of the two classes are
    all the coordinates.
    """
    if model.J != 2:
        raise InvalidArgument("the endpoint vector is only assembled for J = 2")
    lo, hi = tprd_frechet_bounds(model)
    theta = np.empty(4)
    if which == "upper":
        theta[2 * j], theta[2 * j + 1], theta[2 * jd], theta[2 * jd + 1] = hi[2 * j], lo[2 * j + 1], lo[2 * jd], hi[2 * jd + 1]
    elif which == "lower":
        theta[2 * j], theta[2 * j + 1], theta[2 * jd], theta[2 * jd + 1] = lo[2 * j], hi[2 * j + 1], hi[2 * jd], lo[2 * jd + 1]
    else:
        raise InvalidArgument("which must be 'upper' or 'lower'")
    return theta


def tprd_candidates(model: TprdModel, n: int, seed: int) -> np.ndarray:
    """Candidate ``theta`` rows on the affine hull of the feasible set.

    Every feasible ``theta`` has ``sum_j theta[2j] = E[p11]`` and
    ``sum_j theta[2j+1] = E[p01]``, so uniform draws from ``[0, 1]^{2J}``
    almost never land in the set.  Here the first ``J - 1`` classes of each
    slot are drawn uniformly from their coordinate bounds and the last class
    takes the remaining mass.
    """
    rng = np.random.default_rng(seed)
    lo, hi = tprd_frechet_bounds(model)
    J = model.J
    out = np.empty((n, 2 * J))
    for slot, total in ((0, model.weights @ model.p11), (1, model.weights @ model.p01)):
        cols = np.arange(slot, 2 * J, 2)
        free = cols[:-1]
        out[:, free] = lo[free] + (hi[free] - lo[free]) * rng.random((n, free.size))
        out[:, cols[-1]] = total - out[:, free].sum(axis=1)
    return out
