"""Exact small-scale linear programs used to verify the closed forms and DREAM.

:func:`solve_lp_exact` runs a dense two-phase simplex (Dantzig pricing with a
switch to Bland's rule on degenerate stalls), then re-solves the final basis
directly and checks primal and dual feasibility before returning.  The
returned value is therefore certified optimal to ~1e-9.
:func:`enumerate_vertices` is the literal basic-feasible-solution enumeration
for tiny problems; the test-suite uses it to check the simplex.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np

from .errors import DegenerateClass, Infeasible, InvalidArgument, TooLarge, Unbounded

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-11
MAX_VARIABLES = 2000
MAX_ROWS = 400
ENUM_MAX_BASES = 200_000


@dataclass(frozen=True, eq=False)
class LpProblem:
    """``min c.x`` s.t. ``a_eq x = b_eq``, ``a_ub x <= b_ub``, ``x >= 0``."""

    objective: np.ndarray
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    a_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        object.__setattr__(self, "objective", c)
        n = c.size
        for a_name, b_name in (("a_eq", "b_eq"), ("a_ub", "b_ub")):
            a, b = getattr(self, a_name), getattr(self, b_name)
            if a is None and b is None:
                a, b = np.zeros((0, n)), np.zeros(0)
            a = np.asarray(a, dtype=float).reshape(-1, n) if np.size(a) else np.zeros((0, n))
            b = np.asarray(b, dtype=float).ravel()
            if a.shape[0] != b.size:
                raise InvalidArgument(f"{a_name} has {a.shape[0]} rows but {b_name} has {b.size} entries")
            object.__setattr__(self, a_name, a)
            object.__setattr__(self, b_name, b)

    @property
    def n(self) -> int:
        return self.objective.size

    def standard_form(self):
        """Equality form with one slack per inequality row."""
        m_eq, m_ub = self.a_eq.shape[0], self.a_ub.shape[0]
        a = np.zeros((m_eq + m_ub, self.n + m_ub))
        a[:m_eq, : self.n] = self.a_eq
        a[m_eq:, : self.n] = self.a_ub
        a[m_eq:, self.n :] = np.eye(m_ub)
        b = np.concatenate([self.b_eq, self.b_ub])
        c = np.concatenate([self.objective, np.zeros(m_ub)])
        return a, b, c


@dataclass(frozen=True)
class LpSolution:
    value: float
    point: np.ndarray


def _pivot(t, r, k):
    t[r] /= t[r, k]
    col = t[:, k].copy()
    col[r] = 0.0
    t -= np.outer(col, t[r])


def _run_simplex(t, basis, allowed, max_iter):
    """Minimize the objective held in the last row of tableau ``t``.

    Row ``-1`` stores reduced costs with the negated objective value in the
    last column.  Columns outside ``allowed`` never enter.
    """
    m = t.shape[0] - 1
    degenerate_run = 0
    for _ in range(max_iter):
        red = np.where(allowed, t[-1, :-1], 0.0)
        if degenerate_run > 50:
            cand = np.flatnonzero(red < -PIVOT_TOL)
            if cand.size == 0:
                return
            k = int(cand[0])
        else:
            k = int(np.argmin(red))
            if red[k] >= -PIVOT_TOL:
                return
        col = t[:m, k]
        pos = col > PIVOT_TOL
        if not np.any(pos):
            raise Unbounded("objective unbounded below")
        ratios = np.full(m, np.inf)
        ratios[pos] = t[:m, -1][pos] / col[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, abs(best)))
        r = int(ties[np.argmin(np.asarray(basis)[ties])])
        degenerate_run = degenerate_run + 1 if best <= 1e-12 else 0
        _pivot(t, r, k)
        basis[r] = k
    raise RuntimeError("simplex iteration limit reached")


def solve_lp_exact(problem: LpProblem) -> LpSolution:
    """Global minimum of a small LP with an optimality certificate.

    Raises :class:`Infeasible`, :class:`Unbounded`, or :class:`TooLarge`.
    """
    a, b, c = problem.standard_form()
    m, n_std = a.shape
    if problem.n > MAX_VARIABLES or m > MAX_ROWS:
        raise TooLarge(f"LP with {problem.n} variables and {m} rows exceeds the oracle guard")
    if m == 0:
        if np.any(c < 0):
            raise Unbounded("objective unbounded below")
        return LpSolution(0.0, np.zeros(problem.n))
    flip = b < 0
    a[flip] *= -1
    b[flip] *= -1

    # phase 1: artificial basis
    t = np.zeros((m + 1, n_std + m + 1))
    t[:m, :n_std] = a
    t[:m, n_std : n_std + m] = np.eye(m)
    t[:m, -1] = b
    t[-1, :n_std] = -a.sum(axis=0)
    t[-1, -1] = -b.sum()
    basis = list(range(n_std, n_std + m))
    allowed = np.ones(n_std + m, dtype=bool)
    max_iter = 50 * (n_std + m) + 1000
    _run_simplex(t, basis, allowed, max_iter)
    if -t[-1, -1] > FEAS_TOL * max(1.0, np.abs(b).sum()):
        raise Infeasible("no point satisfies the constraints")

    # drive zero-level artificials out; drop redundant rows
    keep_rows = []
    for r in range(m):
        if basis[r] >= n_std:
            nz = np.flatnonzero(np.abs(t[r, :n_std]) > 1e-9)
            if nz.size:
                k = int(nz[np.argmax(np.abs(t[r, nz]))])
                _pivot(t, r, k)
                basis[r] = k
                keep_rows.append(r)
        else:
            keep_rows.append(r)
    rows = keep_rows + [m]
    t = t[rows][:, list(range(n_std)) + [t.shape[1] - 1]]
    basis = [basis[r] for r in keep_rows]
    m = len(basis)

    # phase 2
    t[-1, :] = 0.0
    t[-1, :n_std] = c
    for r, k in enumerate(basis):
        t[-1] -= c[k] * t[r]
    _run_simplex(t, basis, np.ones(n_std, dtype=bool), max_iter)

    x = _certify(a[keep_rows], b[keep_rows], c, basis)
    return LpSolution(float(c @ x), x[: problem.n])


def _certify(a, b, c, basis):
    """Re-solve the optimal basis and check primal/dual feasibility."""
    basis = np.asarray(basis)
    ab = a[:, basis]
    xb = np.linalg.solve(ab, b)
    x = np.zeros(a.shape[1])
    x[basis] = xb
    scale = max(1.0, np.abs(b).max(initial=0.0))
    if xb.min(initial=0.0) < -FEAS_TOL * scale:
        raise RuntimeError("certificate failed: basic solution is infeasible")
    x = np.maximum(x, 0.0)
    y = np.linalg.solve(ab.T, c[basis])
    reduced = c - a.T @ y
    if reduced.min(initial=0.0) < -1e-8 * max(1.0, np.abs(c).max()):
        raise RuntimeError("certificate failed: reduced costs not dual feasible")
    if np.abs(a @ x - b).max(initial=0.0) > FEAS_TOL * scale:
        raise RuntimeError("certificate failed: equality residual too large")
    return x


def enumerate_vertices(problem: LpProblem) -> LpSolution:
    """Minimum over every basic feasible solution of the standard form.

    Exhaustive; intended for problems with a few thousand bases at most.
    Singular bases (determinant below 1e-12 after column scaling) are skipped.
    """
    a, b, c = problem.standard_form()
    m, n_std = a.shape
    if m == 0:
        if np.any(c < 0):
            raise Unbounded("objective unbounded below")
        return LpSolution(0.0, np.zeros(problem.n))
    rank = np.linalg.matrix_rank(a)
    if rank < m:
        # keep a maximal independent set of rows
        keep = []
        for r in range(m):
            if np.linalg.matrix_rank(a[keep + [r]]) > len(keep):
                keep.append(r)
        sol = np.linalg.lstsq(a[keep], b[keep], rcond=None)[0]
        if np.abs(a @ sol - b).max() > 1e-9:
            raise Infeasible("inconsistent equality system")
        a, b, m = a[keep], b[keep], len(keep)
    if comb(n_std, m) > ENUM_MAX_BASES:
        raise TooLarge(f"{comb(n_std, m)} candidate bases exceed the enumeration guard")
    best = None
    for cols in itertools.combinations(range(n_std), m):
        ab = a[:, cols]
        norms = np.linalg.norm(ab, axis=0)
        if np.any(norms == 0) or abs(np.linalg.det(ab / norms)) < 1e-12:
            continue
        xb = np.linalg.solve(ab, b)
        if xb.min() < -FEAS_TOL:
            continue
        x = np.zeros(n_std)
        x[list(cols)] = np.maximum(xb, 0.0)
        val = float(c @ x)
        if best is None or val < best.value - 1e-15:
            best = LpSolution(val, x)
    if best is None:
        raise Infeasible("no basic feasible solution")
    # a feasible polytope is unbounded below iff some extreme ray has negative cost;
    # cross-check with the certified simplex when in doubt
    try:
        solve_lp_exact(problem)
    except Unbounded:
        raise
    return LpSolution(best.value, best.point[: problem.n])


# --- transport programs -------------------------------------------------------


def transport_problem(cost, marg_row, marg_col) -> LpProblem:
    cost = np.asarray(cost, dtype=float)
    m, n = cost.shape
    a_eq = np.zeros((m + n, m * n))
    for i in range(m):
        a_eq[i, i * n : (i + 1) * n] = 1.0
    for j in range(n):
        a_eq[m + j, j::n] = 1.0
    return LpProblem(cost.ravel(), a_eq, np.concatenate([marg_row, marg_col]))


def brute_force_ot(cost, marg_row, marg_col) -> float:
    """Exact Kantorovich cost ``min <cost, plan>`` over the transport polytope."""
    cost = np.atleast_2d(np.asarray(cost, dtype=float))
    marg_row = np.asarray(marg_row, dtype=float).ravel()
    marg_col = np.asarray(marg_col, dtype=float).ravel()
    if cost.shape != (marg_row.size, marg_col.size):
        raise InvalidArgument("cost shape does not match the marginals")
    if np.any(marg_row < 0) or np.any(marg_col < 0):
        raise InvalidArgument("marginals must be non-negative")
    if abs(marg_row.sum() - marg_col.sum()) > 1e-12:
        raise InvalidArgument("marginals carry different total mass")
    return solve_lp_exact(transport_problem(cost, marg_row, marg_col)).value


def partial_ot_problem(inst) -> LpProblem:
    """LP for the 2 x J partial transport instance (row masses exact, columns capped)."""
    pi = np.asarray(inst.pi, dtype=float)
    J = pi.shape[1]
    a_eq = np.zeros((2, 2 * J))
    a_eq[0, :J] = 1.0
    a_eq[1, J:] = 1.0
    a_ub = np.hstack([np.eye(J), np.eye(J)])
    return LpProblem(pi.ravel(), a_eq, np.asarray(inst.gamma1, dtype=float), a_ub, np.asarray(inst.gamma0, dtype=float))


def brute_force_partial_ot(inst) -> float:
    g0 = np.asarray(inst.gamma0, dtype=float)
    g1 = np.asarray(inst.gamma1, dtype=float)
    if g0.sum() < g1.sum() - 1e-12:
        raise Infeasible("column capacity is smaller than the row mass")
    return solve_lp_exact(partial_ot_problem(inst)).value


def kallus_dd_lp(p: Sequence[float], p_pos: float, class_given_x: Sequence[float], class_probs: Sequence[float]) -> float:
    """Per-covariate value of the demographic-disparity support LP.

    Variables ``P_j(y1) = Pr(Y0 = a_j | Y1 = y1, X = x)``; the objective is
    ``sum_{j<J} p_j (P_j(1)/Pr_j - P_J(1)/Pr_J) Pr(Y1 = 1 | x)``, maximized
    subject to ``0 <= P <= 1``, ``sum_j P_j(y1) = 1`` and the class marginal
    at ``x``.  ``p`` has one entry per contrast against the last class.
    """
    p = np.asarray(p, dtype=float).ravel()
    cx = np.asarray(class_given_x, dtype=float).ravel()
    cp = np.asarray(class_probs, dtype=float).ravel()
    J = cp.size
    if p.size != J - 1 or cx.size != J:
        raise InvalidArgument("p must have J-1 entries and class_given_x J entries")
    if np.any(cp <= 1e-12):
        raise DegenerateClass("class probability must be positive")
    # variable order: P_1(0..1), ..., P_J(0..1) -> index 2j + y1
    weight = np.zeros(J)
    weight[: J - 1] = p / cp[: J - 1]
    weight[J - 1] = -p.sum() / cp[J - 1]
    c = np.zeros(2 * J)
    c[1::2] = -weight * p_pos
    a_eq = np.zeros((2 + J, 2 * J))
    a_eq[0, 0::2] = 1.0
    a_eq[1, 1::2] = 1.0
    for j in range(J):
        a_eq[2 + j, 2 * j] = 1.0 - p_pos
        a_eq[2 + j, 2 * j + 1] = p_pos
    b_eq = np.concatenate([[1.0, 1.0], cx])
    sol = solve_lp_exact(LpProblem(c, a_eq, b_eq, np.eye(2 * J), np.ones(2 * J)))
    return -sol.value
