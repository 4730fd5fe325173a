"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line; the lines are repeated in the terminal
summary of the pytest run.
"""

import json
import time

import numpy as np
import pytest

from otident.cli import main
from otident.dream import solve_dream
from otident.models import (
    AtomCloud,
    DisparityMatrix,
    LinearProjectionModel,
    ProjectionRow,
    TprdModel,
    dd_interval,
    dd_support,
    dd_support_batch,
    dd_theta_bounds,
    lp_support_batch,
    tprd_endpoint_theta,
    tprd_interval,
    tprd_interval_via_support,
    tprd_theta_support_batch,
)
from otident.oracle import brute_force_ot, brute_force_partial_ot, kallus_dd_lp
from otident.quantile_ot import antitone_integral, comonotone_integral
from otident.setapprox import HalfspaceStack, filter_candidates, sample_sphere
from otident.simulations import SimConfig, run_sim1, run_sim2
from otident.verify import random_dd_model, random_law, random_partial_instance, random_unit

pytestmark = pytest.mark.slow


def random_tprd_model(rng, J, rows=3):
    w = rng.dirichlet(np.ones(rows))
    split = rng.dirichlet(np.ones(3), size=rows)
    return TprdModel(w, split[:, 0], split[:, 1], rng.dirichlet(np.ones(J), size=rows))


def loglog_slope(sizes, times):
    return float(np.polyfit(np.log(sizes), np.log(times), 1)[0])


def median_time(fn, repeats):
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return float(np.median(samples))


def test_dream_exactness(report):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst, bad = 0.0, 0
    for J in range(2, 11):
        for _ in range(1000):
            inst = random_partial_instance(rng, J)
            err = abs(solve_dream(inst).cost - brute_force_partial_ot(inst))
            worst = max(worst, err)
            bad += err > 1e-9
    seconds = time.perf_counter() - start
    ok = bad == 0 and seconds < 120
    report(1, "DREAM vs LP oracle", ok, f"9000 instances, max error {worst:.2e}, {bad} over 1e-9, {seconds:.1f}s")
    assert ok


def test_rearrangement_engine(report):
    rng = np.random.default_rng(2)
    worst, order_bad = 0.0, 0
    for _ in range(500):
        v, w = random_law(rng, 20), random_law(rng, 20)
        prod = np.outer(v.values, w.values)
        co, anti = comonotone_integral(v, w), antitone_integral(v, w)
        worst = max(worst, abs(co + brute_force_ot(-prod, v.probs, w.probs)), abs(anti - brute_force_ot(prod, v.probs, w.probs)))
        order_bad += co < anti - 1e-12
    ok = worst <= 1e-9 and order_bad == 0
    report(2, "quantile couplings vs LP oracle", ok, f"500 pairs, max error {worst:.2e}, ordering failures {order_bad}")
    assert ok


def test_dd_closed_form_vs_kallus(report):
    rng = np.random.default_rng(3)
    worst, n = 0.0, 0
    for J in range(2, 7):
        E = DisparityMatrix.against_last(J)
        for _ in range(50):
            m = random_dd_model(rng, J)
            for _ in range(20):
                p = random_unit(rng, J - 1)
                lp = sum(w * kallus_dd_lp(p, m.p_pos[i], m.class_given_x[i], m.class_probs) for i, w in enumerate(m.weights))
                worst = max(worst, abs(dd_support(m, E, p) - lp))
                n += 1
    ok = worst <= 1e-8
    report(3, "DD support vs Kallus LP", ok, f"{n} model-direction pairs, max error {worst:.2e}")
    assert ok


def test_dd_interval_duality(report):
    rng = np.random.default_rng(4)
    worst_dual, worst_frechet = 0.0, 0.0
    for k in range(100):
        J = 2 + k % 5
        m = random_dd_model(rng, J)
        j, jd = rng.choice(J, 2, replace=False)
        E = DisparityMatrix.from_pairs([(int(j), int(jd))], J)
        lo, hi = dd_interval(m, int(j), int(jd))
        h = dd_support_batch(m, E, np.array([[1.0], [-1.0]]))
        worst_dual = max(worst_dual, abs(hi - h[0]), abs(lo + h[1]))
        t_lo, t_hi = dd_theta_bounds(m)
        worst_frechet = max(worst_frechet, abs(hi - (t_hi[j] - t_lo[jd])), abs(lo - (t_lo[j] - t_hi[jd])))
    ok = worst_dual <= 1e-9 and worst_frechet <= 1e-9
    report(4, "DD interval duality", ok, f"100 models, support gap {worst_dual:.2e}, Frechet-form gap {worst_frechet:.2e}")
    assert ok


def test_tprd_interval_consistency(report):
    rng = np.random.default_rng(5)
    worst_route, rejected = 0.0, 0
    for k in range(20):
        m = random_tprd_model(rng, 2)
        route = tprd_interval_via_support(m, 0, 1)
        lo, hi = tprd_interval(m, 0, 1)
        worst_route = max(worst_route, abs(route.lower - lo), abs(route.upper - hi), route.attainability_gap)
        if k < 5:
            q = sample_sphere(4, 2000, 100 + k)
            hs = HalfspaceStack(q, tprd_theta_support_batch(m, q))
            pts = np.vstack([tprd_endpoint_theta(m, 0, 1, "upper"), tprd_endpoint_theta(m, 0, 1, "lower")])
            rejected += int((~filter_candidates(pts, hs, 1e-8).accepted).sum())
    ok = worst_route <= 1e-8 and rejected == 0
    report(5, "TPRD interval via support route", ok,
           f"20 models, max gap {worst_route:.2e}; endpoint vectors rejected by 2000 halfspaces: {rejected} of 10")
    assert ok


def test_dirac_point_identification(report):
    rng = np.random.default_rng(6)
    xs = np.linspace(-1.0, 1.0, 9)
    rows = [
        ProjectionRow(1.0 / xs.size, np.array([1.0, x]), random_law(rng, 8), AtomCloud([[np.exp(x)]], [1.0]))
        for x in xs
    ]
    m = LinearProjectionModel(rows, d0=1, dx=2)
    q = sample_sphere(m.dim, 500, 6)
    width = lp_support_batch(m, q) + lp_support_batch(m, -q)
    ok = float(width.max()) <= 1e-8
    report(6, "Dirac conditional laws give a point", ok, f"500 directions, max h(q)+h(-q) = {width.max():.2e}")
    assert ok


def test_simulation_one(report):
    start = time.perf_counter()
    panels = run_sim1(SimConfig())
    seconds = time.perf_counter() - start
    details, ok = [], True
    for p in panels:
        if p.sum_interval is None:
            good = p.containment_violations == 0 and p.truth_accepted
            details.append(f"{p.label}: {p.containment_violations} violations, truth {'in' if p.truth_accepted else 'OUT'}")
        else:
            lo, hi = p.sum_interval
            sums = p.ours.accepted_points.sum(axis=1)
            good = sums.size > 0 and bool(np.all((sums >= lo - 1e-6) & (sums <= hi + 1e-6))) and p.truth_accepted
            details.append(f"{p.label}: sum in [{lo:.4f}, {hi:.4f}] for all {sums.size} points")
        ok &= good
    ok &= seconds < 5 * 60 * len(panels)
    report(7, "simulation 1 containment", ok, "; ".join(details) + f"; {seconds:.0f}s")
    assert ok


def test_simulation_two(report):
    panels = {(p.params["sigma_a"], p.params["sigma_b"]): p for p in run_sim2(SimConfig())}
    chains = [[(2.0, 40.0), (2.0, 20.0), (2.0, 2.0)], [(0.5, 20.0), (0.5, 4.0), (0.5, 0.1)]]
    monotone = all(
        panels[a].ours_area >= panels[b].ours_area for chain in chains for a, b in zip(chain, chain[1:])
    )
    pts = panels[(0.5, 4.0)].ours.accepted_points
    quadrant = pts.size > 0 and bool(np.all(pts > 0))
    contained = all(p.containment_violations == 0 for p in panels.values())
    ok = monotone and quadrant and contained
    areas = ", ".join(f"{panels[k].ours_area:.4g}" for chain in chains for k in chain)
    report(8, "simulation 2 shrinkage", ok,
           f"areas {areas}; (0.5,4) first quadrant: {quadrant}; containment: {contained}")
    assert ok


def test_complexity_envelopes(report):
    rng = np.random.default_rng(9)
    dd_sizes = [4, 8, 16, 32, 64]
    dd_times = []
    for J in dd_sizes:
        m = random_dd_model(rng, J, rows=50)
        E = DisparityMatrix.against_last(J)
        P = sample_sphere(J - 1, 200, 0)
        dd_times.append(median_time(lambda: dd_support_batch(m, E, P), 7) / (200 * 50))
    dd_slope = loglog_slope(dd_sizes, dd_times)

    dream_sizes = [8, 16, 32, 64, 128, 256]
    dream_times = []
    for J in dream_sizes:
        insts = [random_partial_instance(rng, J) for _ in range(20)]
        dream_times.append(median_time(lambda: [solve_dream(i) for i in insts], 7) / len(insts))
    dream_slope = loglog_slope(dream_sizes, dream_times)

    insts = [random_partial_instance(rng, 200) for _ in range(51)]
    samples = []
    for inst in insts:
        start = time.perf_counter()
        solve_dream(inst)
        samples.append(time.perf_counter() - start)
    median_200 = float(np.median(samples))
    ok = dd_slope <= 2.2 and dream_slope <= 3.2 and median_200 < 0.010
    report(9, "complexity envelopes", ok,
           f"DD slope {dd_slope:.2f} (<= 2.2), DREAM slope {dream_slope:.2f} (<= 3.2), J=200 median {median_200 * 1e3:.2f} ms")
    assert ok


def test_cli_determinism(report, tmp_path):
    dd = tmp_path / "dd.json"
    dd.write_text(json.dumps({"kind": "dd", "rows": [
        {"weight": 0.3, "p_pos": 0.6, "class_given_x": [0.2, 0.3, 0.5]},
        {"weight": 0.7, "p_pos": 0.4, "class_given_x": [0.5, 0.1, 0.4]}]}))
    tprd = tmp_path / "tprd.json"
    tprd.write_text(json.dumps({"kind": "tprd", "rows": [
        {"weight": 0.4, "p01": 0.2, "p11": 0.5, "class_given_x": [0.3, 0.7]},
        {"weight": 0.6, "p01": 0.3, "p11": 0.3, "class_given_x": [0.6, 0.4]}]}))
    lp = tmp_path / "lp.json"
    lp.write_text(json.dumps({"kind": "linear_projection", "dgp": "sim2", "sigma_a": 0.5, "sigma_b": 4, "x_grid": 11, "atoms": 10}))
    small = ["--directions", "120", "--candidates", "900", "--grid", "11", "--seed", "42"]
    commands = {
        "support-dd": ["support", "--model", str(dd), *small],
        "support-tprd": ["support", "--model", str(tprd), *small],
        "support-lp": ["support", "--model", str(lp), "--restricted", *small],
        "set-dd": ["set", "--model", str(dd), *small],
        "set-tprd": ["set", "--model", str(tprd), *small],
        "set-lp": ["set", "--model", str(lp), *small],
        "sim1": ["sim1", *small],
        "sim2": ["sim2", *small],
    }
    differing, files = [], 0
    for name, args in commands.items():
        runs = []
        for k in range(2):
            out = tmp_path / f"{name}-{k}"
            assert main([*args, "--out", str(out)]) == 0, name
            runs.append({p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))})
        files += len(runs[0])
        if runs[0] != runs[1] or not runs[0]:
            differing.append(name)
    ok = not differing
    report(10, "byte-identical CLI output", ok,
           f"{len(commands)} command configurations, {files} CSV files, differing: {differing or 'none'}")
    assert ok
