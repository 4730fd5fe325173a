"""Exact solver for the 2 x J partial transport problem.

    minimize    sum_{i,j} pi[i, j] * plan[i, j]
    subject to  plan >= 0,
                plan[i, :].sum() == gamma1[i]        (i = 0, 1)
                plan[:, j].sum() <= gamma0[j]        (j = 0..J-1)

Columns are first put in canonical order: d = pi[1] - pi[0] non-increasing.
In that order some optimal plan has monotone support: row 0 only uses columns
``<= pivot`` and row 1 only columns ``>= pivot``.  For a fixed pivot the two
rows decouple except for the shared pivot column, so each row is a fractional
knapsack solved greedily; if the pivot column is over-subscribed, the excess
is moved to the cheapest spare capacity of either row.  The answer is the
minimum over the pivots in a narrow bracket.

All indices here are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Infeasible, InvalidArgument, ParseError

MASS_TOL = 1e-12
PLAN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PartialOtInstance:
    pi: np.ndarray
    gamma1: np.ndarray
    gamma0: np.ndarray

    def __post_init__(self):
        pi = np.array(self.pi, dtype=float)
        g1 = np.array(self.gamma1, dtype=float).ravel()
        g0 = np.array(self.gamma0, dtype=float).ravel()
        if pi.ndim != 2 or pi.shape[0] != 2 or pi.shape[1] < 1:
            raise InvalidArgument(f"pi must be a 2 x J matrix with J >= 1, got shape {pi.shape}")
        if g1.size != 2:
            raise InvalidArgument("gamma1 must hold exactly two masses")
        if g0.size != pi.shape[1]:
            raise InvalidArgument(f"gamma0 has {g0.size} entries but pi has {pi.shape[1]} columns")
        for name, arr in (("pi", pi), ("gamma1", g1), ("gamma0", g0)):
            if not np.all(np.isfinite(arr)):
                raise InvalidArgument(f"{name} contains non-finite entries")
        if np.any(g1 < 0) or np.any(g0 < 0):
            raise InvalidArgument("masses must be non-negative")
        for name, arr in (("pi", pi), ("gamma1", g1), ("gamma0", g0)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def J(self) -> int:
        return self.pi.shape[1]

    @property
    def feasible(self) -> bool:
        return self.gamma0.sum() >= self.gamma1.sum() - MASS_TOL

    def permuted(self, order) -> "PartialOtInstance":
        order = np.asarray(order)
        return PartialOtInstance(self.pi[:, order], self.gamma1, self.gamma0[order])

    @classmethod
    def from_json(cls, obj) -> "PartialOtInstance":
        try:
            return cls(obj["pi"], obj["gamma1"], obj["gamma0"])
        except KeyError as exc:
            raise ParseError(f"instance: missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise ParseError(f"instance: {exc}") from None

    def to_json(self) -> dict:
        return {"pi": self.pi.tolist(), "gamma1": self.gamma1.tolist(), "gamma0": self.gamma0.tolist()}


@dataclass(frozen=True, eq=False)
class DreamSolution:
    """Optimal cost and plan (original column order).

    ``pivot`` and ``bracket`` are positions in the canonical order ``order``;
    ``plan[:, order]`` has monotone support around ``pivot``.
    """

    cost: float
    plan: np.ndarray
    pivot: int
    bracket: tuple[int, int]
    order: np.ndarray


def canonical_order(inst: PartialOtInstance) -> tuple[np.ndarray, PartialOtInstance]:
    """Stable sort of the columns by ``pi[1] - pi[0]``, largest first."""
    d = inst.pi[1] - inst.pi[0]
    order = np.argsort(-d, kind="stable")
    return order, inst.permuted(order)


def narrow_bracket(inst: PartialOtInstance) -> tuple[int, int]:
    """Range of pivots that can carry a monotone plan (instance in canonical order).

    ``lo`` is the first column whose prefix capacity covers ``gamma1[0]``;
    ``hi`` the last column whose suffix capacity covers ``gamma1[1]``.
    """
    if not inst.feasible:
        raise Infeasible(
            f"column capacity {inst.gamma0.sum():.12g} is below the row mass {inst.gamma1.sum():.12g}"
        )
    g0 = inst.gamma0
    prefix = np.cumsum(g0)
    suffix = np.cumsum(g0[::-1])[::-1]
    lo = int(np.argmax(prefix >= inst.gamma1[0] - MASS_TOL)) if prefix[-1] >= inst.gamma1[0] - MASS_TOL else inst.J - 1
    ok = np.flatnonzero(suffix >= inst.gamma1[1] - MASS_TOL)
    hi = int(ok[-1]) if ok.size else 0
    if lo > hi:
        # only reachable through rounding at the feasibility boundary
        lo, hi = min(lo, hi), max(lo, hi)
    return lo, hi


def _greedy_fill(cap, mass):
    """Fractional knapsack: fill capacities left to right until ``mass`` is placed."""
    before = np.cumsum(cap, axis=-1) - cap
    return np.clip(mass - before, 0.0, cap)


def _pivot_costs(pi, g1, g0, pivots):
    """Optimal cost for each pivot (canonical order) plus the per-pivot pieces.

    Works on all pivots at once: arrays are ``(L, J)`` with one row per pivot,
    columns listed in each transport row's own cost order.
    """
    J = pi.shape[1]
    P = np.asarray(pivots)[:, None]
    rows = []
    for i in (0, 1):
        o = np.argsort(pi[i], kind="stable")
        pos = np.empty(J, dtype=int)
        pos[o] = np.arange(J)
        allowed = (o[None, :] <= P) if i == 0 else (o[None, :] >= P)
        cap = np.where(allowed, g0[o][None, :], 0.0)
        fill = _greedy_fill(cap, g1[i])
        short = g1[i] - fill.sum(axis=1)
        base = fill @ pi[i, o]
        ppos = pos[P[:, 0]]
        at_p = np.take_along_axis(fill, ppos[:, None], axis=1)[:, 0]
        after = np.arange(J)[None, :] > ppos[:, None]
        spare = np.where(after, cap - fill, 0.0)
        # a row can give up at most what it placed on the pivot column
        spare = _greedy_fill(spare, at_p[:, None])
        unit = pi[i, o][None, :] - pi[i, P[:, 0]][:, None]
        rows.append(dict(o=o, fill=fill, short=short, base=base, at_p=at_p, spare=spare, unit=unit))
    gp = g0[P[:, 0]]
    excess = np.maximum(rows[0]["at_p"] + rows[1]["at_p"] - gp, 0.0)
    amounts = np.concatenate([rows[0]["spare"], rows[1]["spare"]], axis=1)
    units = np.concatenate([rows[0]["unit"], rows[1]["unit"]], axis=1)
    by_cost = np.argsort(units, axis=1, kind="stable")
    amt_sorted = np.take_along_axis(amounts, by_cost, axis=1)
    moved_sorted = _greedy_fill(amt_sorted, excess[:, None])
    moved = np.empty_like(moved_sorted)
    np.put_along_axis(moved, by_cost, moved_sorted, axis=1)
    delta = np.sum(moved * units, axis=1)
    cost = rows[0]["base"] + rows[1]["base"] + delta
    stuck = excess - moved.sum(axis=1)
    bad = (rows[0]["short"] > MASS_TOL) | (rows[1]["short"] > MASS_TOL) | (stuck > MASS_TOL)
    cost = np.where(bad, np.inf, cost)
    return cost, rows, moved


def _plan_for_pivot(pi, g1, g0, pivot):
    _, rows, moved = _pivot_costs(pi, g1, g0, [pivot])
    J = pi.shape[1]
    plan = np.zeros((2, J))
    for i in (0, 1):
        r = rows[i]
        o = r["o"]
        take = moved[0, i * J : (i + 1) * J]
        plan[i, o] = r["fill"][0] + take
        plan[i, pivot] -= take.sum()
    return np.maximum(plan, 0.0)


def solve_dream(inst: PartialOtInstance) -> DreamSolution:
    """Minimum-cost plan of the 2 x J partial transport problem."""
    if not inst.feasible:
        raise Infeasible(
            f"column capacity {inst.gamma0.sum():.12g} is below the row mass {inst.gamma1.sum():.12g}"
        )
    order, canon = canonical_order(inst)
    lo, hi = narrow_bracket(canon)
    pivots = np.arange(lo, hi + 1)
    costs, _, _ = _pivot_costs(canon.pi, canon.gamma1, canon.gamma0, pivots)
    if not np.any(np.isfinite(costs)):
        # rounding pushed every bracket pivot over a capacity edge; widen once
        pivots = np.arange(canon.J)
        costs, _, _ = _pivot_costs(canon.pi, canon.gamma1, canon.gamma0, pivots)
        if not np.any(np.isfinite(costs)):
            raise Infeasible("no pivot admits a feasible monotone plan")
    k = int(np.argmin(costs))
    pivot = int(pivots[k])
    plan_c = _plan_for_pivot(canon.pi, canon.gamma1, canon.gamma0, pivot)
    plan = np.empty_like(plan_c)
    plan[:, order] = plan_c
    return DreamSolution(float(costs[k]), plan, pivot, (lo, hi), order)


def check_solution(inst: PartialOtInstance, sol: DreamSolution, tol: float = PLAN_TOL) -> list[str]:
    """Return a list of violated solution invariants (empty when all hold)."""
    problems = []
    plan = sol.plan
    if plan.min() < -tol:
        problems.append(f"negative plan entry {plan.min():.3g}")
    if np.abs(plan.sum(axis=1) - inst.gamma1).max() > tol:
        problems.append("row sums differ from gamma1")
    if (plan.sum(axis=0) - inst.gamma0).max() > tol:
        problems.append("column capacity exceeded")
    if abs(float(np.sum(inst.pi * plan)) - sol.cost) > tol * max(1.0, np.abs(inst.pi).max()):
        problems.append("cost does not match the plan")
    pc = plan[:, sol.order]
    if pc[1, : sol.pivot].max(initial=0.0) > tol or pc[0, sol.pivot + 1 :].max(initial=0.0) > tol:
        problems.append("plan support is not monotone around the pivot")
    return problems
