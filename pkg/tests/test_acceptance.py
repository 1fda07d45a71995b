"""End-to-end acceptance suite: one test per shipped guarantee.

Each test states its tolerance inline. Runtime-capped tests measure wall
time with time.perf_counter and assert against the cap.
"""

import json
import time

import numpy as np
import pytest

from fairshare import (
    FairnessBounds,
    PreferenceSpec,
    SimConfig,
    Targeting,
    check_feasible,
    coefficients,
    coefficients_closed_form,
    coefficients_recursive,
    generate_synthetic_graph,
    grid_feasible,
    grid_solve,
    intergroup_dominance_condition,
    params_from_preferences,
    preset,
    price_of_fairness,
    simulate_graph,
    simulate_mass_model,
    solve_agnostic,
    solve_fair,
    total_mass,
)
from fairshare.estimation import fit_all, generate_event_log
from fairshare.fairness import constraint_geometry, max_average_exposure
from fairshare.propagation import _article_matrix, objective_coefficients

from conftest import random_bounds, random_strict_params

PRESETS = ("facebook", "twitter-us-elections", "twitter-brexit",
           "twitter-abortion")


def test_01_closed_form_equals_recursion():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        params = random_strict_params(rng, T=50)
        rec = coefficients_recursive(params)
        clo = coefficients_closed_form(params)
        worst = max(worst,
                    float(np.abs(rec.w - clo.w).max()),
                    float(np.abs(rec.u - clo.u).max()))
    elapsed = time.perf_counter() - start
    assert worst <= 1e-9
    assert elapsed < 5.0


def test_02_eigenvalue_identities():
    rng = np.random.default_rng(102)
    for _ in range(500):
        params = random_strict_params(rng)
        co = coefficients_closed_form(params)
        for s in range(2):
            ev = np.sort(np.linalg.eigvals(_article_matrix(params, s)).real)
            assert co.a2[s] == pytest.approx(ev[0], abs=1e-12)
            assert co.a1[s] == pytest.approx(ev[1], abs=1e-12)
            assert co.a1[s] > co.a2[s] > 0.0
            psi_A, psi_B = params.psi[0, s], params.psi[1, s]
            assert (co.a1[s] + co.a2[s]
                    == pytest.approx(psi_A * params.q_A + psi_B * params.q_B,
                                     abs=1e-12))
            assert (co.a1[s] * co.a2[s]
                    == pytest.approx(psi_A * psi_B
                                     * (params.q_A + params.q_B - 1.0),
                                     abs=1e-12))


def test_03_coefficient_signs():
    rng = np.random.default_rng(103)
    for _ in range(500):
        co = coefficients_recursive(random_strict_params(rng, T=20))
        assert np.all(co.w > 0.0)
        assert np.all(co.u[0] == 0.0)
        assert np.all(co.u[1:] > 0.0)


def test_04_agnostic_matches_bruteforce():
    rng = np.random.default_rng(104)
    corners = [Targeting(x, y) for x in (0.0, 1.0) for y in (0.0, 1.0)]
    for _ in range(1000):
        co = coefficients_recursive(random_strict_params(rng))
        sol = solve_agnostic(co)
        best = max(total_mass(co, th) for th in corners)
        assert sol.objective == best
    # Under in-group preference, targeting each group with the other
    # group's article is never the unique optimum.
    for _ in range(1000):
        co = coefficients_recursive(random_strict_params(rng, fsd=True))
        c_Aa, c_Ba, _ = objective_coefficients(co)
        assert not (c_Aa < 0.0 and c_Ba > 0.0)


def test_05_feasibility_certificate_vs_grid():
    rng = np.random.default_rng(105)
    unresolved = 0
    for _ in range(500):
        co = coefficients_recursive(random_strict_params(rng))
        bounds = random_bounds(rng)
        analytic = check_feasible(co, bounds)["feasible"]
        grid = grid_feasible(co, bounds, resolution=201)
        if analytic == grid:
            continue
        # A coarse grid can miss feasible slivers thinner than one grid
        # step but can never report a false feasible point.
        if analytic and grid_feasible(co, bounds, resolution=2001):
            continue
        unresolved += 1
    assert unresolved == 0


def test_06_constrained_optimality_beats_grid():
    rng = np.random.default_rng(106)
    start = time.perf_counter()
    solved = 0
    while solved < 500:
        co = coefficients_recursive(random_strict_params(rng))
        bounds = random_bounds(rng)
        sol = solve_fair(co, bounds)
        if not sol.feasible:
            continue
        solved += 1
        geo = constraint_geometry(co, bounds)
        x, y = sol.theta.as_tuple()
        assert geo.satisfied(x, y, tol=1e-9)
        gsol = grid_solve(co, bounds, resolution=1001)
        if not gsol.feasible:
            # The feasible region is thinner than one grid step; there is
            # no grid point to compare against. The exact constraint check
            # above already validates the solution.
            continue
        c_Aa, c_Ba, _ = objective_coefficients(co)
        slack = (abs(c_Aa) + abs(c_Ba)) / 1000.0
        assert sol.objective >= gsol.objective - slack
    assert time.perf_counter() - start < 60.0


def test_07_intergroup_exposure_dominance():
    # Claimed behavior: whenever both dominance conditions hold and each
    # group is seeded only with its in-group article, group A ends up
    # more exposed to article b than to article a at every step t >= 3.
    rng = np.random.default_rng(107)
    hits = 0
    failures = 0
    while hits < 200:
        params = random_strict_params(rng, fsd=True)
        if not intergroup_dominance_condition(params):
            continue
        hits += 1
        co = coefficients_recursive(params)
        l = co.trajectory(Targeting(1.0, 0.0)).l
        if not np.all(l[2:, 0, 1] > l[2:, 0, 0]):
            failures += 1
    assert failures == 0, (
        f"{failures}/200 condition-satisfying draws break the claimed "
        "exposure ordering"
    )


def test_08_average_exposure_bound():
    rng = np.random.default_rng(108)
    grid = np.linspace(0.0, 1.0, 101)
    for _ in range(50):
        params = random_strict_params(rng)
        co = coefficients_recursive(params)
        for g in range(2):
            bound_a = max_average_exposure(co, g, 0, params)
            attained = (co.trajectory(Targeting(1.0, 1.0)).l[:, g, 0].sum()
                        / (co.T * params.pi[g]))
            assert attained == pytest.approx(bound_a, abs=1e-9)
            bound_b = max_average_exposure(co, g, 1, params)
            attained_b = (co.trajectory(Targeting(0.0, 0.0)).l[:, g, 1].sum()
                          / (co.T * params.pi[g]))
            assert attained_b == pytest.approx(bound_b, abs=1e-9)
        # No targeting on a 101^2 grid exceeds the bound.
        xs, ys = np.meshgrid(grid, grid, indexing="ij")
        avg_a = (co.sw[:, 0][None, None, :] * np.stack([xs, ys], axis=-1)
                 + co.su[:, 0][None, None, :] * np.stack([ys, xs], axis=-1)
                 ) / (co.T * params.pi[None, None, :])
        bounds_a = np.array([max_average_exposure(co, g, 0, params)
                             for g in range(2)])
        assert np.all(avg_a <= bounds_a[None, None, :] + 1e-12)


def test_09_price_of_fairness():
    rng = np.random.default_rng(109)
    for _ in range(200):
        co = coefficients_recursive(random_strict_params(rng))
        bounds = random_bounds(rng)
        if not check_feasible(co, bounds)["feasible"]:
            continue
        assert price_of_fairness(co, bounds) >= 1.0 - 1e-9
    params, _ = preset("facebook")
    co = coefficients(params)
    pof = price_of_fairness(co, FairnessBounds(0.25, 2.0))
    assert 1.0 <= pof <= 1.1


def test_10_delta_sweep_shape():
    params, _ = preset("facebook")
    co = coefficients(params)
    lows = np.linspace(0.05, 0.95, 10)
    highs = np.concatenate([[1.0005], np.linspace(1.1, 4.0, 9)])
    feasible = np.zeros((10, 10), dtype=bool)
    theta_near_one = 0
    n_feasible = 0
    for i, hi in enumerate(highs):
        for j, lo in enumerate(lows):
            sol = solve_fair(co, FairnessBounds(lo, hi))
            feasible[i, j] = sol.feasible
            if sol.feasible:
                n_feasible += 1
                if sol.theta.theta_A_a >= 0.99:
                    theta_near_one += 1
    assert any(not feasible[i].any() for i in range(10))
    assert n_feasible > 0
    assert theta_near_one >= 0.8 * n_feasible


def _random_problem(seed):
    rng = np.random.default_rng(seed)
    prefs = [[PreferenceSpec(alpha=float(rng.uniform(0.5, 3.0)),
                             beta=float(rng.uniform(0.5, 3.0)),
                             cost=1.0, value=float(rng.uniform(2.0, 10.0)))
              for _ in range(2)] for _ in range(2)]
    params = params_from_preferences(
        prefs, pi_A=float(rng.uniform(0.3, 0.7)),
        q_A=float(rng.uniform(0.55, 0.9)), q_B=float(rng.uniform(0.55, 0.9)),
        T=10)
    return params, prefs


def test_11_mass_model_tracks_analytic():
    start = time.perf_counter()
    problems = [preset(name) for name in PRESETS] + [_random_problem(1101)]
    cfg = SimConfig(n_agents=100_000, trials=25, horizon_T=10, master_seed=11)
    theta = Targeting(0.8, 0.3)
    for params, prefs in problems:
        co = coefficients(params)
        analytic = co.trajectory(theta).l
        res = simulate_mass_model(prefs, params, theta, cfg)
        se = np.maximum(res.mass_standard_error(),
                        np.sqrt(np.maximum(analytic, 1e-12)
                                / (cfg.n_agents * cfg.trials)))
        assert np.all(np.abs(res.empirical_mass() - analytic) <= 3.0 * se)
    assert time.perf_counter() - start < 120.0


def test_12_graph_simulation_tracks_analytic():
    params, prefs = preset("twitter-abortion")
    co = coefficients(params)
    theta = Targeting(0.5, 0.5)
    graph = generate_synthetic_graph(10_000, params.pi_A, params.q_A,
                                     params.q_B, 27.0, seed=12)
    cfg = SimConfig(n_agents=graph.n, trials=100, horizon_T=10, master_seed=13)
    res = simulate_graph(graph, prefs, theta, cfg, mode="one_to_one")
    analytic = co.trajectory(theta).l
    emp = res.empirical_mass()
    # 5% relative, or 3 standard errors where the cell mass is too small
    # for a relative check to be meaningful.
    se = np.maximum(res.mass_standard_error(),
                    np.sqrt(np.maximum(analytic, 1e-12)
                            / (cfg.n_agents * cfg.trials)))
    ok = ((np.abs(emp - analytic) <= 0.05 * np.maximum(analytic, 1e-12))
          | (np.abs(emp - analytic) <= 3.0 * se))
    assert ok.all()

    # Broadcast mode floods neighborhoods, so per-step liked counts rise
    # then collapse instead of decaying monotonically.
    fb_params, fb_prefs = preset("facebook")
    fb_graph = generate_synthetic_graph(10_000, fb_params.pi_A, fb_params.q_A,
                                        fb_params.q_B, 27.0, seed=14)
    bres = simulate_graph(fb_graph, fb_prefs, Targeting(0.5, 0.5),
                          SimConfig(n_agents=fb_graph.n, trials=10,
                                    horizon_T=10, master_seed=15),
                          mode="broadcast")
    per_step = bres.liked.mean(axis=0).sum(axis=(1, 2))
    diffs = np.diff(per_step)
    assert np.any(diffs > 0) and np.any(diffs < 0)


def test_13_estimation_round_trip():
    _, prefs = preset("facebook")
    log = generate_event_log(prefs, 0.5, 0.72, 0.68,
                             n_events=400_000, seed=13)
    fitted = fit_all(log)
    assert abs(fitted["q_A"] - 0.72) <= 0.01
    assert abs(fitted["q_B"] - 0.68) <= 0.01
    for g in range(2):
        for s in range(2):
            cell = fitted["cells"][f"{'AB'[g]}{'ab'[s]}"]
            assert abs(cell["alpha"] - prefs[g][s].alpha) <= 0.1
            assert abs(cell["beta"] - prefs[g][s].beta) <= 0.1


def test_14_determinism_across_thread_counts(monkeypatch, tmp_path, capsys):
    from fairshare.cli import main

    params, prefs = preset("twitter-abortion")
    cfg = SimConfig(n_agents=5000, trials=4, horizon_T=8, master_seed=77)
    graph = generate_synthetic_graph(5000, params.pi_A, params.q_A,
                                     params.q_B, 15.0, seed=78)
    outputs = []
    for threads in ("1", "3", "7"):
        monkeypatch.setenv("FAIRSHARE_THREADS", threads)
        r_mass = simulate_mass_model(prefs, params, Targeting(0.6, 0.4), cfg)
        r_graph = simulate_graph(graph, prefs, Targeting(0.6, 0.4), cfg,
                                 mode="broadcast")
        p = tmp_path / f"mass_{threads}.csv"
        r_mass.write_csv(p, header_lines=["seed=77"])
        outputs.append((p.read_bytes(), r_graph.shown.tobytes(),
                        r_graph.clicked.tobytes(), r_graph.liked.tobytes()))
    assert outputs[0] == outputs[1] == outputs[2]

    # Same contract at the command-line level.
    cli_outputs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("FAIRSHARE_THREADS", threads)
        out = tmp_path / f"cli_{threads}.csv"
        code = main(["simulate", "--preset", "twitter-abortion",
                     "--mode", "model", "--policy", "half",
                     "--agents", "2000", "--trials", "2", "--seed", "5",
                     "--out", str(out)])
        assert code == 0
        body = [line for line in out.read_text().splitlines()
                if not line.startswith("# out=")]
        summary = json.loads(capsys.readouterr().out)
        summary["manifest"].pop("out")
        cli_outputs.append((body, summary))
    assert cli_outputs[0] == cli_outputs[1]
