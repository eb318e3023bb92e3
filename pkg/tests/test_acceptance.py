"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines inline; they
are also repeated in the terminal summary.
"""

import itertools
import time
from fractions import Fraction

import numpy as np
import pytest

from muxopinion import (ModelParams, aggregate, build_network, compare_measures, effective_matrix,
                        fixed_point, fractional_ranks, gamma_lower_bound, integrate_ode,
                        naive_opinion_centrality, opinion_centrality, random_multiplex,
                        raw_opinion_score, simulate, solve_romp_numeric, spearman, write_report)
from muxopinion.io import COMPARISON_COLUMNS, write_matrix_csv
from muxopinion.toynet import (BarrelSpec, alpha_sweep, barrel_params, build_barrel,
                               edge_effects)

from conftest import W_EDGES, edgeless, random_strict

BARREL_GRID = [(n, c) for n in (4, 12, 100) for c in (1, 2, 5)]


def random_family(count, seed, uniform_alpha=False):
    """Random strict networks with I <= 50, C <= 4 and random rates and budget."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n, c = int(rng.integers(2, 51)), int(rng.integers(1, 5))
        net = random_strict(rng, n, c, density=float(rng.uniform(0.05, 0.5)))
        R = float(rng.uniform(0.1, 10))
        if uniform_alpha:
            alpha = np.ones((n, c))
        else:
            alpha = rng.uniform(0.05, 3.0, (n, c))
        yield net, ModelParams(alpha=alpha, budget=R), R


def dense_influence(eff):
    """Independent dense route: inv(Id - ebar) by numpy."""
    return np.linalg.inv(np.eye(eff.n) - eff.dense())


def test_criterion_01_barrel_leaf_score(criterion):
    rng = np.random.default_rng(101)
    worst = 0.0
    for n, c in BARREL_GRID:
        for _ in range(5):
            spec = BarrelSpec(n, c, *rng.uniform(0, 0.3, 3))
            eff = effective_matrix(build_barrel(spec), barrel_params(spec, 1.0, 1.0))
            s = raw_opinion_score(eff)
            idx = spec.class_indices()
            leaves = np.concatenate([idx["leaf1"], idx["leaf2"]])
            worst = max(worst, float(np.max(np.abs(s[leaves] - 1.0))))
    ok = criterion(1, "barrel leaf raw score is 1", worst <= 1e-12,
                   f"max |s_leaf - 1| = {worst:.2e} over 45 barrels (tol 1e-12)")
    assert ok


def test_criterion_02_aggregated_barrel_degrees(criterion):
    rng = np.random.default_rng(102)
    worst = 0.0
    for c in (1, 2, 5):
        for _ in range(10):
            spec = BarrelSpec(4, c, *rng.uniform(0, 0.3, 3))
            params = barrel_params(spec, float(rng.uniform(0.5, 5)), 1.0)
            W = aggregate(build_barrel(spec), params).weights.toarray()
            out_deg, in_deg = W.sum(axis=1), W.sum(axis=0)
            e0, e1, e2 = edge_effects(spec, float(params.alpha[0, 0]), 1.0)
            # nodes 1, 3 are the hubs; leaf 2 hangs off hub 1 (weight e1), leaf 4 off hub 3 (e2)
            expected_out = [e0 + e1, 0.0, e0 + e2, 0.0]
            expected_in = [e0, e1, e0, e2]
            worst = max(worst, float(np.max(np.abs(out_deg - expected_out))),
                        float(np.max(np.abs(in_deg - expected_in))))
    ok = criterion(2, "aggregated barrel degrees", worst <= 1e-12,
                   f"max abs error {worst:.2e} over 30 barrels (tol 1e-12)")
    assert ok


def test_criterion_03_closed_form_matches_projected_gradient(criterion):
    worst, count = 0.0, 0
    for net, params, R in random_family(120, 103):
        eff = effective_matrix(net, params)
        gamma = 2 * gamma_lower_bound(eff, R)
        closed = opinion_centrality(eff, R, gamma, conditions=False).values
        numeric = solve_romp_numeric(eff, R, gamma, tol=1e-11)
        worst = max(worst, float(np.max(np.abs(closed - numeric))))
        count += 1
    ok = criterion(3, "closed form equals projected-gradient optimum", worst <= 1e-6,
                   f"max L-inf gap {worst:.2e} over {count} networks (tol 1e-6)")
    assert ok


def test_criterion_04_naive_vertex_check(criterion):
    mismatches, ties, count = 0, 0, 0
    for net, params, R in random_family(120, 103):
        eff = effective_matrix(net, params)
        naive = naive_opinion_centrality(eff, R).values
        # linear objective at each simplex vertex R * e_j: total stationary opinion
        J = dense_influence(eff) / eff.Lambda
        vertex_value = R * J.sum(axis=0)
        best = vertex_value.max()
        tied = np.flatnonzero(vertex_value >= best * (1 - 1e-12))
        ties += len(tied) > 1
        winner = int(np.flatnonzero(naive)[0])
        ok_here = (winner == tied[0] and naive[winner] == R
                   and np.count_nonzero(naive) == 1)
        mismatches += not ok_here
        count += 1
    ok = criterion(4, "naive allocation is the best simplex vertex", mismatches == 0,
                   f"{mismatches} argmax mismatches over {count} networks ({ties} with ties)")
    assert ok


def test_criterion_05_budget_and_positivity(criterion):
    worst_sum, negatives, count = 0.0, 0, 0
    for net, params, R in random_family(120, 105):
        eff = effective_matrix(net, params)
        bound = gamma_lower_bound(eff, R)
        for factor in (0.5, 1.1, 2.0, 10.0):
            gamma = factor * bound if bound > 0 else factor
            v = opinion_centrality(eff, R, gamma, conditions=False).values
            worst_sum = max(worst_sum, abs(float(v.sum()) - R))
            if gamma > bound:
                negatives += int(np.any(v <= 0))
            count += 1
        v = opinion_centrality(eff, R, "auto", conditions=False).values
        worst_sum = max(worst_sum, abs(float(v.sum()) - R))
        negatives += int(np.any(v <= 0))
    ok = criterion(5, "budget sums to R and is positive above the bound",
                   worst_sum <= 1e-9 and negatives == 0,
                   f"max |sum - R| {worst_sum:.2e} (tol 1e-9), "
                   f"{negatives} non-positive allocations above the bound, {count} solves")
    assert ok


def _ranks_grid(net):
    """Fractional ranks of the allocation for every (R, alpha_hat, gamma) combination."""
    grid = {}
    for R in (0.1, 1.0, 100.0):
        for a in 2.0 ** np.arange(8):
            eff = effective_matrix(net, ModelParams.uniform(net, a, budget=R))
            bound = gamma_lower_bound(eff, R)
            for g in ("1.1x", 10.0, 1000.0):
                gamma = 1.1 * bound if g == "1.1x" else g
                grid[(R, a, g)] = fractional_ranks(
                    opinion_centrality(eff, R, gamma, conditions=False).values)
    return grid


def _varies(grid, axis):
    """True when ranks change along ``axis`` (0: R, 1: alpha_hat, 2: gamma) with the rest fixed."""
    groups = {}
    for key, ranks in grid.items():
        rest = tuple(k for i, k in enumerate(key) if i != axis)
        groups.setdefault(rest, []).append(ranks)
    return any(any(not np.array_equal(r, g[0]) for r in g[1:]) for g in groups.values())


@pytest.mark.xfail(strict=True, reason="R and alpha_hat both enter the total rate, so the "
                   "effective matrix and the ranks depend on their ratio")
def test_criterion_06_rank_invariance(criterion):
    rng = np.random.default_rng(106)
    nets = [build_barrel(BarrelSpec(n, c, *rng.uniform(0, 0.3, 3))) for n, c in BARREL_GRID]
    nets += [net for net, _, _ in random_family(100, 106, uniform_alpha=True)]
    flips = {"gamma": 0, "alpha_hat": 0, "R": 0}
    failed = 0
    for net in nets:
        grid = _ranks_grid(net)
        flips["R"] += _varies(grid, 0)
        flips["alpha_hat"] += _varies(grid, 1)
        flips["gamma"] += _varies(grid, 2)
        first = next(iter(grid.values()))
        failed += any(not np.array_equal(r, first) for r in grid.values())
    detail = (f"{failed}/{len(nets)} networks change ranks; changes along gamma "
              f"{flips['gamma']}, alpha_hat {flips['alpha_hat']}, R {flips['R']}")
    ok = criterion(6, "fractional ranks invariant in gamma, R, alpha_hat", failed == 0, detail)
    assert ok


def test_criterion_07_uniform_rate_asymptote(criterion):
    rows = alpha_sweep(BarrelSpec(12, 2, 0.1, 0.2, 0.3), 1.0, 1.0, [1, 10, 100])
    devs = [r.max_deviation for r in rows]
    final = rows[-1].result.budget_shares
    near = bool(np.all(np.abs(final - 1 / 12) < 0.01))
    monotone = devs[0] > devs[1] > devs[2]
    ok = criterion(7, "budget shares approach 1/12 as alpha_hat grows", near and monotone,
                   f"max deviation {devs[0]:.3e} > {devs[1]:.3e} > {devs[2]:.3e}; "
                   f"leaf share at 100 = {rows[-1].class_shares['leaf1']:.7f}")
    assert ok


def _convergence_cases():
    net_w = build_network(W_EDGES, normalize="strict")
    rng = np.random.default_rng(108)
    net_r = random_strict(rng, 10, 2, density=0.4)
    lam_r = rng.uniform(0.1, 1.0, 10)
    alpha_r = rng.uniform(0.1, 1.0, (10, 2))
    return [("Instance W", net_w, ModelParams(alpha=np.ones((2, 1)), lam=[1.0, 1.0])),
            ("random 10-node", net_r, ModelParams(alpha=alpha_r, lam=lam_r))]


def test_criterion_08_simulation_converges_to_fixed_point(criterion):
    sim_gap, ode_gap, oracle_gap = 0.0, 0.0, 0.0
    for name, net, params in _convergence_cases():
        eff = effective_matrix(net, params)
        x_star = fixed_point(eff, params.lam)
        # independent dense route to the same fixed point
        oracle = np.linalg.solve(np.eye(eff.n) - eff.dense(), params.lam / eff.Lambda)
        oracle_gap = max(oracle_gap, float(np.max(np.abs(x_star - oracle))))
        if name == "Instance W":
            oracle_gap = max(oracle_gap, float(np.max(np.abs(x_star - [0.25, 0.28125]))))
        for seed in (0, 1, 2):
            trace = simulate(net, params, 2_000_000, seed=seed, sample_every=100_000)
            sim_gap = max(sim_gap, float(np.max(np.abs(trace.time_average - x_star))))
        ode = integrate_ode(eff, params.lam, t_end=100, dt=0.01).final
        ode_gap = max(ode_gap, float(np.max(np.abs(ode - x_star))))
    ok = criterion(8, "simulation and ODE converge to the fixed point",
                   sim_gap <= 0.05 and ode_gap <= 1e-6 and oracle_gap <= 1e-12,
                   f"tail-average gap {sim_gap:.2e} (tol 0.05), ODE gap {ode_gap:.2e} "
                   f"(tol 1e-6), fixed point vs dense solve {oracle_gap:.1e}")
    assert ok


def test_criterion_09_opinions_stay_in_unit_box(criterion):
    rng = np.random.default_rng(109)
    lo, hi = np.inf, -np.inf
    for _ in range(50):
        n, c = int(rng.integers(2, 16)), int(rng.integers(1, 4))
        net = random_strict(rng, n, c, density=float(rng.uniform(0.1, 0.9)))
        lam = rng.uniform(0, 2, n) * (rng.random(n) < 0.7)
        params = ModelParams(alpha=rng.uniform(0, 2, (n, c)), lam=lam,
                             delta=float(rng.uniform(1e-3, 0.9)), x0=rng.random(n))
        if params.total_rate() == 0:
            continue
        trace = simulate(net, params, 5000, seed=int(rng.integers(2**31)), sample_every=1)
        lo = min(lo, float(trace.samples.min()), float(trace.time_average.min()))
        hi = max(hi, float(trace.samples.max()), float(trace.time_average.max()))
    ok = criterion(9, "every sampled opinion lies in [0, 1]", lo >= 0 and hi <= 1,
                   f"observed range [{lo:.6g}, {hi:.6g}] over 50 simulations")
    assert ok


def _rank_counting(v):
    # descending fractional ranks by counting, no sorting
    return [Fraction(2 + 2 * sum(u > vi for u in v) + sum(u == vi for u in v) - 1, 2) for vi in v]


def _pearson_exact_squared(rx, ry):
    mx, my = sum(rx) / len(rx), sum(ry) / len(ry)
    num = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    sxx = sum((a - mx) ** 2 for a in rx)
    syy = sum((b - my) ** 2 for b in ry)
    return num, sxx * syy


def test_criterion_10_spearman(criterion):
    perm_bad, perm_total = 0, 0
    for n in range(2, 7):
        base = list(range(n))
        for perm in itertools.permutations(base):
            # tie-free ranks: rho is the rational 1 - 6 sum d^2 / (n (n^2 - 1))
            d2 = sum((a - b) ** 2 for a, b in zip(_rank_counting(base), _rank_counting(perm)))
            exact = 1 - Fraction(6) * d2 / (n * (n * n - 1))
            perm_bad += spearman(base, perm) != float(exact)
            perm_total += 1
    # tied inputs against values computed by hand
    hand = [(([4, 4, 2, 1], [9, 5, 5, 0]), 5 / 6),
            (([1, 1, 2, 2], [1, 2, 1, 2]), 0.0),
            (([1, 2, 2, 3, 3, 3], [1, 2, 3, 4, 5, 6]), np.sqrt(6 / 7))]
    tie_err = 0.0
    for (x, y), value in hand:
        num, den2 = _pearson_exact_squared(_rank_counting(x), _rank_counting(y))
        # the hand value agrees with the exact rank-based definition
        assert float(num * num / den2) == pytest.approx(value * value, abs=1e-15)
        tie_err = max(tie_err, abs(spearman(x, y) - value))
    rng = np.random.default_rng(110)
    reversed_ok = all(spearman(x, x[::-1]) == -1.0
                      for x in (np.sort(rng.random(int(k))) for k in rng.integers(2, 40, 50)))
    ok = criterion(10, "Spearman correlation", perm_bad == 0 and tie_err <= 1e-15 and reversed_ok,
                   f"{perm_bad}/{perm_total} permutation mismatches (exact), tied-input error "
                   f"{tie_err:.1e}, reversed input gives -1: {reversed_ok}")
    assert ok


def test_criterion_11_large_network_runtime(criterion):
    t0 = time.perf_counter()
    net = random_multiplex(8000, 7, 8, rng=11, normalize="strict")
    eff = effective_matrix(net, ModelParams.uniform(net, 1.0, budget=1.0))
    res = opinion_centrality(eff, 1.0)
    elapsed = time.perf_counter() - t0
    sane = abs(res.values.sum() - 1) <= 1e-9 and bool(np.all(res.values > 0))
    ok = criterion(11, "I=8000, C=7 opinion centrality within 5 minutes",
                   elapsed <= 300 and sane,
                   f"{elapsed:.2f} s including network construction; allocation valid: {sane}")
    assert ok


def test_criterion_12_comparison_report_shape(criterion):
    spec = BarrelSpec(12, 2, 0.1, 0.2, 0.3)
    net_r = random_multiplex(40, 3, 4, rng=12)
    inputs = [(build_barrel(spec), barrel_params(spec, 1.0, 1.0)),
              (net_r, ModelParams.uniform(net_r, 1.0, budget=1.0)),
              (edgeless(5, 2), ModelParams(alpha=np.ones((5, 2)), budget=1.0)),
              (build_network(W_EDGES), ModelParams.uniform(build_network(W_EDGES), budget=2.0))]
    measures = ["opinion", "degree-total", "degree-in", "degree-out", "pagerank",
                "eigenvector", "katz", "hits-hub", "hits-authority"]
    problems = []
    for k, (net, params) in enumerate(inputs):
        rep = compare_measures(net, params, measures)
        lines = write_report(rep, "csv").splitlines()
        if lines[0] != ",".join(COMPARISON_COLUMNS):
            problems.append(f"input {k}: header {lines[0]}")
        body = [line.split(",") for line in lines[1:]]
        if [row[0] for row in body] != rep.measures:
            problems.append(f"input {k}: rows {[row[0] for row in body]}")
        if any(row[2] not in ("ok", "undefined", "skipped", "failed") for row in body):
            problems.append(f"input {k}: bad status")
        matrix = write_matrix_csv(rep).splitlines()
        if len(matrix) != len(rep.measures) + 1:
            problems.append(f"input {k}: matrix has {len(matrix)} lines")
    ok = criterion(12, "comparison report has a fixed shape on any input", not problems,
                   "; ".join(problems) or f"{len(inputs)} inputs, {len(measures)} measures each")
    assert ok
