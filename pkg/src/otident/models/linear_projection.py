"""Linear projection model with an outcome and regressors from different datasets.

``Y1 = (Y0', X')theta + eps`` with ``E[eps (Y0', X')'] = 0``, where ``Y1`` and
``Y0`` are never observed together.  For every unit ``t = (t0, tX)`` the
identified set satisfies

    t' M theta <= E_X[ int_0^1 F^{-1}_{t0'Y0|x}(u) F^{-1}_{Y1|x}(u) du ] + tX' E[Y1 X],

with ``M = E[(Y0', X')'(Y0', X')]``.  When ``M`` is invertible the support
function is the same right-hand side evaluated at ``t0 = (M^{-1} q)_0`` and
``tX = (M^{-1} q)_X``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.linalg import null_space

from ..errors import InvalidArgument, SingularMoment
from ..measures import DiscreteDist, GaussianSpec, discretize_gaussian, standard_normal_nodes
from ..quantile_ot import comonotone_batch
from ..setapprox import Halfspace, HalfspaceStack, uniform_box

COND_LIMIT = 1e12
UNIT_TOL = 1e-10
DEFAULT_ATOMS = 400
_DIRECTION_CHUNK = 16


@dataclass(frozen=True, eq=False)
class GaussianVector:
    """Multivariate normal conditional law of ``Y0`` given ``x``."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.array(self.mean, dtype=float))
        cov = np.atleast_2d(np.array(self.cov, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise InvalidArgument("covariance shape does not match the mean")
        if np.abs(cov - cov.T).max() > 1e-10 or np.linalg.eigvalsh(cov).min() < -1e-10:
            raise InvalidArgument("covariance must be symmetric positive semidefinite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    def second_moment(self) -> np.ndarray:
        return self.cov + np.outer(self.mean, self.mean)


@dataclass(frozen=True, eq=False)
class AtomCloud:
    """Discrete multivariate conditional law: ``atoms[k]`` with probability ``probs[k]``."""

    atoms: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        atoms = np.atleast_2d(np.array(self.atoms, dtype=float))
        probs = np.array(self.probs, dtype=float).ravel()
        if atoms.shape[0] != probs.size or probs.size == 0:
            raise InvalidArgument("need one probability per atom")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise InvalidArgument("atom probabilities must be non-negative and sum to 1")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    @property
    def mean(self) -> np.ndarray:
        return self.probs @ self.atoms

    def second_moment(self) -> np.ndarray:
        return (self.atoms * self.probs[:, None]).T @ self.atoms


Y0Law = Union[GaussianVector, AtomCloud]
Y1Law = Union[DiscreteDist, GaussianSpec]


@dataclass(frozen=True, eq=False)
class ProjectionRow:
    weight: float
    x: np.ndarray
    law1: Y1Law
    law0: Y0Law


def _y1_mean(law) -> float:
    return law.mean if isinstance(law, GaussianSpec) else law.mean()


class LinearProjectionModel:
    """Conditional laws on a covariate grid plus the moments ``M`` and ``E[Y1 X]``.

    When ``moment_matrix``/``cross_moment`` are omitted they are computed from
    the rows, which must then carry their covariate value ``x``.
    ``n_atoms`` controls how Gaussian laws are discretized when a closed form
    is unavailable (or when ``analytic=False``).
    """

    def __init__(
        self,
        rows: Sequence[ProjectionRow],
        d0: int,
        dx: int,
        moment_matrix=None,
        cross_moment=None,
        n_atoms: int = DEFAULT_ATOMS,
        analytic: bool = True,
    ):
        rows = tuple(rows)
        if not rows:
            raise InvalidArgument("model needs at least one covariate row")
        w = np.array([r.weight for r in rows], dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise InvalidArgument("row weights must be non-negative and sum to 1")
        for r in rows:
            if r.law0.dim != d0:
                raise InvalidArgument(f"Y0 law has dimension {r.law0.dim}, expected {d0}")
        self.rows = rows
        self.d0, self.dx = int(d0), int(dx)
        self.weights = w
        self.n_atoms = int(n_atoms)
        self.analytic = bool(analytic)
        if moment_matrix is None or cross_moment is None:
            m_est, c_est = self._moments_from_rows()
            moment_matrix = m_est if moment_matrix is None else moment_matrix
            cross_moment = c_est if cross_moment is None else cross_moment
        self.moment_matrix = np.array(moment_matrix, dtype=float).reshape(self.dim, self.dim)
        self.cross_moment = np.array(cross_moment, dtype=float).ravel()
        if self.cross_moment.size != self.dx:
            raise InvalidArgument(f"cross moment needs {self.dx} entries")
        m = self.moment_matrix
        if np.abs(m - m.T).max() > 1e-10 or np.linalg.eigvalsh(0.5 * (m + m.T)).min() < -1e-10:
            raise InvalidArgument("moment matrix must be symmetric positive semidefinite")
        self._prepare_rows()

    @property
    def dim(self) -> int:
        return self.d0 + self.dx

    def _moments_from_rows(self):
        m = np.zeros((self.dim, self.dim))
        c = np.zeros(self.dx)
        for r in self.rows:
            x = np.atleast_1d(np.asarray(r.x, dtype=float))
            if x.size != self.dx:
                raise InvalidArgument("row covariate has the wrong dimension")
            mu0 = r.law0.mean
            blk = np.zeros((self.dim, self.dim))
            blk[: self.d0, : self.d0] = r.law0.second_moment()
            blk[: self.d0, self.d0 :] = np.outer(mu0, x)
            blk[self.d0 :, : self.d0] = np.outer(x, mu0)
            blk[self.d0 :, self.d0 :] = np.outer(x, x)
            m += r.weight * blk
            c += r.weight * _y1_mean(r.law1) * x
        return m, c

    def _prepare_rows(self):
        """Cache per-row arrays so each direction costs one batched quantile sweep."""
        self._all_gaussian = self.analytic and all(
            isinstance(r.law0, GaussianVector) and isinstance(r.law1, GaussianSpec) for r in self.rows
        )
        if self._all_gaussian:
            self._g_mean0 = np.stack([r.law0.mean for r in self.rows])
            self._g_cov0 = np.stack([r.law0.cov for r in self.rows])
            self._g_mean1 = np.array([r.law1.mean for r in self.rows])
            self._g_sd1 = np.array([r.law1.sd for r in self.rows])
            return
        y1 = []
        for r in self.rows:
            law = r.law1
            if isinstance(law, GaussianSpec):
                law = discretize_gaussian(law, self.n_atoms)
            y1.append(law)
        self._y1 = y1
        self._z = standard_normal_nodes(self.n_atoms)
        self._stacked = None
        if len({d.values.size for d in y1}) != 1:
            return
        st = {"y1v": np.stack([d.values for d in y1]), "y1p": np.stack([d.probs for d in y1])}
        if all(isinstance(r.law0, AtomCloud) for r in self.rows):
            if len({r.law0.atoms.shape for r in self.rows}) != 1:
                return
            st.update(kind="atoms", atoms=np.stack([r.law0.atoms for r in self.rows]),
                      p0=np.stack([r.law0.probs for r in self.rows]))
        elif all(isinstance(r.law0, GaussianVector) for r in self.rows):
            n = self._z.size
            st.update(kind="gauss", mean=np.stack([r.law0.mean for r in self.rows]),
                      cov=np.stack([r.law0.cov for r in self.rows]),
                      p0=np.full((len(self.rows), n), 1.0 / n))
        else:
            return
        n1 = st["y1v"].shape[1]
        st["uniform"] = (
            st["p0"].shape[1] == n1 and np.all(st["p0"] == 1.0 / n1) and np.all(st["y1p"] == st["y1p"][:, :1])
        )
        self._stacked = st

    def _row_scalar_law(self, r, v):
        """Values and probabilities of ``v . Y0`` given the row's covariate."""
        if isinstance(r.law0, AtomCloud):
            return r.law0.atoms @ v, r.law0.probs
        mu = float(r.law0.mean @ v)
        sd = float(np.sqrt(max(v @ r.law0.cov @ v, 0.0)))
        n = self._z.size
        return mu + sd * self._z, np.full(n, 1.0 / n)

    def quantile_term(self, v0) -> np.ndarray:
        """``E_X[int F^{-1}_{v'Y0|x} F^{-1}_{Y1|x}]`` for each row of ``v0`` (shape ``(k, d0)``)."""
        v0 = np.atleast_2d(np.asarray(v0, dtype=float))
        if v0.shape[1] != self.d0:
            raise InvalidArgument(f"t0 must have {self.d0} entries")
        if self._all_gaussian:
            mu_v = v0 @ self._g_mean0.T
            var_v = np.einsum("ki,nij,kj->kn", v0, self._g_cov0, v0)
            per_row = mu_v * self._g_mean1 + np.sqrt(np.maximum(var_v, 0.0)) * self._g_sd1
            return per_row @ self.weights
        out = np.empty(v0.shape[0])
        if self._stacked is not None:
            y1v, y1p, probs0 = self._stacked["y1v"], self._stacked["y1p"], self._stacked["p0"]
            n_rows = len(self.rows)
            for s in range(0, v0.shape[0], _DIRECTION_CHUNK):
                block = v0[s : s + _DIRECTION_CHUNK]
                k = block.shape[0]
                vals = self._stacked_values(block)
                if self._stacked["uniform"]:
                    # equal-weight atoms on both sides: the quantile integral is a sorted dot product
                    res = np.mean(np.sort(vals, axis=2) * y1v[None, :, :], axis=2)
                else:
                    res = comonotone_batch(
                        vals.reshape(k * n_rows, -1), np.tile(probs0, (k, 1)), np.tile(y1v, (k, 1)), np.tile(y1p, (k, 1))
                    ).reshape(k, n_rows)
                out[s : s + k] = res @ self.weights
            return out
        for i, v in enumerate(v0):
            total = 0.0
            for r, d1 in zip(self.rows, self._y1):
                a, p = self._row_scalar_law(r, v)
                total += r.weight * float(comonotone_batch(a, p, d1.values, d1.probs)[0])
            out[i] = total
        return out

    def _stacked_values(self, block):
        """Atom values of ``v . Y0`` for every direction and row: shape ``(k, rows, atoms)``."""
        st = self._stacked
        if st["kind"] == "atoms":
            return np.einsum("rnd,kd->krn", st["atoms"], block)
        mu = block @ st["mean"].T
        sd = np.sqrt(np.maximum(np.einsum("ki,rij,kj->kr", block, st["cov"], block), 0.0))
        return mu[:, :, None] + sd[:, :, None] * self._z[None, None, :]

    def condition_number(self) -> float:
        return float(np.linalg.cond(self.moment_matrix))

    def inverse_moment(self) -> np.ndarray:
        cond = self.condition_number()
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise SingularMoment(
                f"moment matrix condition number {cond:.3g} exceeds {COND_LIMIT:.0e}; "
                "the support function is unavailable, filter candidates with halfspaces instead"
            )
        return np.linalg.inv(self.moment_matrix)


def _unit_directions(t, d):
    t = np.atleast_2d(np.asarray(t, dtype=float))
    if t.shape[1] != d:
        raise InvalidArgument(f"directions must have {d} coordinates, got {t.shape[1]}")
    if np.abs(np.linalg.norm(t, axis=1) - 1.0).max() > UNIT_TOL:
        raise InvalidArgument("directions must have unit norm")
    return t


def lp_halfspaces(model: LinearProjectionModel, directions) -> HalfspaceStack:
    """One halfspace ``(M t) . theta <= s(t)`` per row of ``directions``."""
    t = _unit_directions(directions, model.dim)
    offsets = model.quantile_term(t[:, : model.d0]) + t[:, model.d0 :] @ model.cross_moment
    return HalfspaceStack(t @ model.moment_matrix, offsets)


def lp_halfspace(model: LinearProjectionModel, t) -> Halfspace:
    hs = lp_halfspaces(model, np.atleast_2d(t))
    return Halfspace(hs.normals[0], hs.offsets[0])


def lp_support_batch(model: LinearProjectionModel, directions) -> np.ndarray:
    q = _unit_directions(directions, model.dim)
    w = q @ model.inverse_moment()  # M^{-1} is symmetric
    return model.quantile_term(w[:, : model.d0]) + w[:, model.d0 :] @ model.cross_moment


def lp_support(model: LinearProjectionModel, q) -> float:
    """Support function of the identified set at the unit direction ``q``."""
    return float(lp_support_batch(model, np.atleast_2d(q))[0])


def projected_support_2d(model: LinearProjectionModel, directions_2d, coords=(0, 1)) -> np.ndarray:
    """Support of the projection onto two coordinates: ``h`` at ``q`` padded with zeros."""
    d2 = np.atleast_2d(np.asarray(directions_2d, dtype=float))
    q = np.zeros((d2.shape[0], model.dim))
    q[:, list(coords)] = d2
    return lp_support_batch(model, q)


def lp_candidates(model: LinearProjectionModel, lower, upper, n: int, seed: int) -> np.ndarray:
    """Candidate ``theta`` rows on the affine set ``M_X theta = E[Y1 X]``.

    The covariate rows of the moment conditions involve no unobserved
    coupling, so the identified set lies in this affine set and has no
    interior when ``dx > 0``.  Draws are uniform in null-space coordinates
    over the range that the box ``[lower, upper]`` spans along each of them.
    When the equations have no solution the plain box is sampled.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if model.dx == 0:
        return uniform_box(lower, upper, n, seed)
    mx = model.moment_matrix[model.d0 :, :]
    b = model.cross_moment
    base = np.linalg.lstsq(mx, b, rcond=None)[0]
    if np.abs(mx @ base - b).max() > 1e-9 * (1.0 + np.abs(b).max()):
        return uniform_box(lower, upper, n, seed)
    basis = null_space(mx)
    if basis.shape[1] == 0:
        return np.tile(base, (n, 1))
    centre, half = 0.5 * (lower + upper), 0.5 * (upper - lower)
    mid = basis.T @ (centre - base)
    reach = np.abs(basis).T @ half
    z = uniform_box(mid - reach, mid + reach, n, seed)
    return base + z @ basis.T
