"""Randomized equivalence suites: closed forms and DREAM against the LP oracle."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .dream import PartialOtInstance, solve_dream
from .errors import VerificationFailure
from .measures import DiscreteDist, make_discrete
from .models.fairness import DdModel, DisparityMatrix, dd_support
from .oracle import brute_force_ot, brute_force_partial_ot, kallus_dd_lp
from .quantile_ot import antitone_integral, comonotone_integral

DREAM_TOL = 1e-9
QUANTILE_TOL = 1e-9
DD_TOL = 1e-8


# --- random instance generators --------------------------------------------------


def random_partial_instance(rng: np.random.Generator, J: int) -> PartialOtInstance:
    """Costs uniform in [-1, 1]; column capacities uniform then normalized to total 1;
    row masses uniform, rescaled to total 1 only when they would exceed the capacity."""
    pi = rng.uniform(-1.0, 1.0, size=(2, J))
    g0 = rng.uniform(0.0, 1.0, size=J)
    g0 /= g0.sum()
    g1 = rng.uniform(0.0, 1.0, size=2)
    if g1.sum() > 1.0:
        g1 /= g1.sum()
    return PartialOtInstance(pi, g1, g0)


def random_law(rng: np.random.Generator, max_atoms: int = 20) -> DiscreteDist:
    n = int(rng.integers(1, max_atoms + 1))
    if rng.random() < 0.3:
        values = rng.integers(-3, 4, size=n).astype(float)  # ties exercise the merge path
    else:
        values = rng.uniform(-2.0, 2.0, size=n)
    probs = rng.dirichlet(np.ones(n))
    return make_discrete(zip(values, probs))


def random_dd_model(rng: np.random.Generator, J: int, rows: int | None = None) -> DdModel:
    n = int(rng.integers(1, 6)) if rows is None else rows
    w = rng.dirichlet(np.ones(n))
    p_pos = rng.uniform(0.0, 1.0, size=n)
    c = rng.dirichlet(np.ones(J), size=n)
    return DdModel(w, p_pos, c)


def random_unit(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)


def _law_json(d: DiscreteDist):
    return [list(a) for a in d.atoms]


def _dd_json(m: DdModel):
    return {"weights": m.weights.tolist(), "p_pos": m.p_pos.tolist(), "class_given_x": m.class_given_x.tolist()}


# --- suites --------------------------------------------------------------------------


@dataclass
class SuiteResult:
    name: str
    count: int
    max_error: float
    tolerance: float
    seconds: float
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.count} cases, max error {self.max_error:.3g} (tol {self.tolerance:g}), {self.seconds:.1f}s"


def dream_suite(count: int, seed: int, J_values=range(2, 11), tol: float = DREAM_TOL) -> SuiteResult:
    """``count`` instances per ``J``: DREAM cost against the LP optimum."""
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    worst, fails, n = 0.0, [], 0
    for J in J_values:
        for _ in range(count):
            inst = random_partial_instance(rng, J)
            err = abs(solve_dream(inst).cost - brute_force_partial_ot(inst))
            worst = max(worst, err)
            n += 1
            if err > tol:
                fails.append({"instance": inst.to_json(), "error": err})
    return SuiteResult("dream-vs-lp", n, worst, tol, time.perf_counter() - start, fails)


def quantile_suite(count: int, seed: int, tol: float = QUANTILE_TOL) -> SuiteResult:
    """Comonotone/antitone integrals against the transport LP with costs -vw and +vw."""
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    worst, fails = 0.0, []
    for _ in range(count):
        v, w = random_law(rng), random_law(rng)
        prod = np.outer(v.values, w.values)
        co, anti = comonotone_integral(v, w), antitone_integral(v, w)
        err = max(abs(co + brute_force_ot(-prod, v.probs, w.probs)), abs(anti - brute_force_ot(prod, v.probs, w.probs)))
        worst = max(worst, err)
        if err > tol or co < anti - tol:
            fails.append({"v": _law_json(v), "w": _law_json(w), "error": err})
    return SuiteResult("quantile-vs-lp", count, worst, tol, time.perf_counter() - start, fails)


def dd_suite(count: int, seed: int, directions: int = 20, J_values=range(2, 7), tol: float = DD_TOL) -> SuiteResult:
    """DD support function against the per-covariate Kallus LP, integrated over the grid."""
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    worst, fails, n = 0.0, [], 0
    for J in J_values:
        E = DisparityMatrix.against_last(J)
        for _ in range(count):
            m = random_dd_model(rng, J)
            for _ in range(directions):
                p = random_unit(rng, J - 1)
                lp = sum(
                    w * kallus_dd_lp(p, m.p_pos[i], m.class_given_x[i], m.class_probs) for i, w in enumerate(m.weights)
                )
                err = abs(dd_support(m, E, p) - lp)
                worst = max(worst, err)
                n += 1
                if err > tol:
                    fails.append({"model": _dd_json(m), "p": p.tolist(), "error": err})
    return SuiteResult("dd-vs-kallus-lp", n, worst, tol, time.perf_counter() - start, fails)


def fixture_suite(fixture: dict, tol: float = DREAM_TOL) -> SuiteResult:
    """A pinned instance ``{"instance": {...}, "expected_cost": c}`` checked against both solvers."""
    start = time.perf_counter()
    inst = PartialOtInstance.from_json(fixture["instance"])
    expected = float(fixture["expected_cost"])
    got_dream = solve_dream(inst).cost
    got_lp = brute_force_partial_ot(inst)
    err = max(abs(got_dream - expected), abs(got_lp - expected))
    fails = [] if err <= tol else [{"instance": inst.to_json(), "expected_cost": expected, "dream": got_dream, "lp": got_lp}]
    return SuiteResult("pinned-fixture", 1, err, tol, time.perf_counter() - start, fails)


def run_all(count: int, seed: int, fixture: dict | None = None) -> list[SuiteResult]:
    """Default suites; ``count`` scales every suite (0 runs nothing)."""
    results = []
    if count > 0:
        results.append(dream_suite(count, seed))
        results.append(quantile_suite(count, seed + 1))
        results.append(dd_suite(max(1, count // 10), seed + 2))
    if fixture is not None:
        results.append(fixture_suite(fixture))
    return results


def raise_on_failure(results: list[SuiteResult]) -> None:
    for r in results:
        if not r.passed:
            raise VerificationFailure(
                f"{r.name}: {len(r.failures)} case(s) beyond tolerance {r.tolerance:g}", instance=r.failures[0]
            )


def failure_json(err: VerificationFailure) -> str:
    return json.dumps(err.instance, sort_keys=True)
