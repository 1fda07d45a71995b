"""Command-line interface: solve, sweep, simulate and fit.

Outputs are CSV/JSON grids from which the usual plots (delta heatmaps,
per-step trajectories, disparity box plots) can be drawn with any tool.
Every output embeds a manifest describing the exact invocation. Exit
codes: 0 success, 2 bad input, 3 infeasible problem, 4 estimation
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import metadata

import numpy as np

from . import estimation, simulate
from .errors import DegenerateSample, FairshareError, InfeasibleProblem, NoEvents
from .fairness import FairnessBounds
from .graphs import generate_synthetic_graph, graph_from_edges
from .model import PreferenceSpec, Targeting, params_from_preferences
from .optimizer import grid_solve, price_of_fairness, solve_agnostic, solve_fair
from .presets import DEFAULT_DELTA_HI, DEFAULT_DELTA_LO, DEFAULT_T, preset
from .propagation import coefficients

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_ESTIMATION = 4

_CELLS = ("Aa", "Ab", "Ba", "Bb")


def _version() -> str:
    try:
        return metadata.version("fairshare")
    except metadata.PackageNotFoundError:
        return "unknown"


def _manifest(args, extra=None) -> dict:
    man = {
        "command": args.command,
        "source": args.preset if getattr(args, "preset", None) else getattr(args, "config", None),
        "seed": getattr(args, "seed", None),
        "out": getattr(args, "out", None),
        "version": _version(),
    }
    if extra:
        man.update(extra)
    return man


def _manifest_lines(man: dict):
    return [f"{k}={v}" for k, v in man.items()]


def _load_problem(args):
    """(ModelParams, prefs table) from --preset or --config JSON."""
    if getattr(args, "preset", None):
        return preset(args.preset, T=getattr(args, "horizon", None) or DEFAULT_T)
    if not getattr(args, "config", None):
        raise ValueError("either --preset or --config is required")
    with open(args.config) as fh:
        cfg = json.load(fh)
    for key in ("pi_A", "q_A", "q_B", "cells"):
        if key not in cfg:
            raise ValueError(f"config missing required key {key!r}")
    prefs = [[None, None], [None, None]]
    for name in _CELLS:
        if name not in cfg["cells"]:
            raise ValueError(f"config cells missing {name!r}")
        cell = cfg["cells"][name]
        g, s = "AB".index(name[0]), "ab".index(name[1])
        prefs[g][s] = PreferenceSpec(
            alpha=float(cell["alpha"]), beta=float(cell["beta"]),
            cost=float(cell.get("cost", 1.0)), value=float(cell.get("value", 2000.0)),
        )
    T = getattr(args, "horizon", None) or int(cfg.get("T", DEFAULT_T))
    params = params_from_preferences(
        prefs, pi_A=float(cfg["pi_A"]), q_A=float(cfg["q_A"]), q_B=float(cfg["q_B"]),
        T=T, mode=str(cfg.get("mode", "simulation")),
    )
    return params, prefs


def _bounds(args, required: bool) -> FairnessBounds | None:
    lo, hi = args.delta_lo, args.delta_hi
    if lo is None and hi is None and not required:
        return None
    return FairnessBounds(
        delta_lo=lo if lo is not None else DEFAULT_DELTA_LO,
        delta_hi=hi if hi is not None else DEFAULT_DELTA_HI,
    )


def _emit_json(payload: dict, out: str | None):
    text = json.dumps(payload, indent=2, default=float)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    print(text)


def cmd_solve(args) -> int:
    params, _ = _load_problem(args)
    coeffs = coefficients(params)
    if args.mode == "agnostic":
        sol = solve_agnostic(coeffs)
        pof = None
    else:
        bounds = _bounds(args, required=True)
        sol = (solve_fair if args.mode == "fair" else grid_solve)(coeffs, bounds)
        pof = price_of_fairness(coeffs, bounds) if sol.feasible else None
    payload = {"manifest": _manifest(args, {"mode": args.mode}), **sol.to_dict()}
    payload["pof"] = pof
    if params.warnings:
        payload["warnings"] = params.warnings
    _emit_json(payload, args.out)
    return EXIT_OK if sol.feasible else EXIT_INFEASIBLE


def _parse_grid(text: str) -> list:
    """Grid spec: comma list ("0.1,0.5") or start:stop:count ("0.1:0.9:10")."""
    if ":" in text:
        start, stop, count = text.split(":")
        return [float(v) for v in np.linspace(float(start), float(stop), int(count))]
    return [float(v) for v in text.split(",")]


def cmd_sweep(args) -> int:
    params, _ = _load_problem(args)
    coeffs = coefficients(params)
    lows = _parse_grid(args.delta_lo)
    highs = _parse_grid(args.delta_hi)
    for lo in lows:
        if not (0.0 < lo < 1.0):
            raise ValueError(f"delta_lo grid value {lo} outside (0, 1)")
    for hi in highs:
        if hi <= 1.0:
            raise ValueError(f"delta_hi grid value {hi} must exceed 1")
    lines = ["delta_lo,delta_hi,feasible,theta_Aa,theta_Ba,objective,pof"]
    for lo in lows:
        for hi in highs:
            sol = solve_fair(coeffs, FairnessBounds(lo, hi))
            if sol.feasible:
                pof = price_of_fairness(coeffs, FairnessBounds(lo, hi))
                lines.append(
                    f"{lo:.6g},{hi:.6g},1,{sol.theta.theta_A_a:.10g},"
                    f"{sol.theta.theta_B_a:.10g},{sol.objective:.10g},{pof:.10g}"
                )
            else:
                lines.append(f"{lo:.6g},{hi:.6g},0,,,,")
    man = _manifest(args)
    text = "".join(f"# {line}\n" for line in _manifest_lines(man))
    text += "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _load_graph(args, params):
    if args.graph:
        if not args.graph_groups:
            raise ValueError("--graph requires --graph-groups")
        edges = np.loadtxt(args.graph, delimiter=",", dtype=np.int64, ndmin=2)
        node_rows = np.loadtxt(args.graph_groups, delimiter=",", dtype=str, ndmin=2)
        nodes = node_rows[:, 0].astype(np.int64)
        n = int(nodes.max()) + 1
        group = np.zeros(n, dtype=np.int8)
        group[nodes] = np.array([{"A": 0, "B": 1}[g.strip()] for g in node_rows[:, 1]],
                                dtype=np.int8)
        return graph_from_edges(n, group, edges[:, 0], edges[:, 1])
    return generate_synthetic_graph(
        n=args.agents, pi_A=params.pi_A, q_A=params.q_A, q_B=params.q_B,
        mean_degree=args.mean_degree, seed=args.seed + 1,
    )


def cmd_simulate(args) -> int:
    params, prefs = _load_problem(args)
    coeffs = coefficients(params)
    bounds = _bounds(args, required=False)
    if "," in args.policy:
        x, y = args.policy.split(",")
        policy = Targeting(float(x), float(y))
    else:
        policy = args.policy
    theta = simulate.resolve_policy(coeffs, bounds, policy)
    cfg = simulate.SimConfig(
        n_agents=args.agents, trials=args.trials, horizon_T=params.horizon_T,
        master_seed=args.seed,
    )
    if args.mode == "model":
        result = simulate.simulate_mass_model(prefs, params, theta, cfg)
    else:
        graph = _load_graph(args, params)
        mode = "one_to_one" if args.mode == "one-to-one" else "broadcast"
        result = simulate.simulate_graph(graph, prefs, theta, cfg, mode=mode)
    man = _manifest(args, {
        "policy": str(args.policy), "mode": args.mode,
        "theta": list(theta.as_tuple()),
        "trials": args.trials, "agents": args.agents,
    })
    result.write_csv(args.out, header_lines=_manifest_lines(man))
    disp = simulate.disparity_metrics(result)
    summary = {
        "manifest": man,
        "total_clicked_mean": float(result.clicked.sum(axis=(1, 2, 3)).mean()),
        "total_liked_mean": float(result.liked.sum(axis=(1, 2, 3)).mean()),
        "exposure_gap_quartiles": disp["quartiles"]["exposure_gap"],
        "like_gap_quartiles": disp["quartiles"]["like_gap"],
    }
    print(json.dumps(summary, indent=2, default=float))
    return EXIT_OK


def cmd_fit(args) -> int:
    log = estimation.EventLog.read_csv(args.events)
    fitted = estimation.fit_all(log)
    cells = {}
    diagnostics = {}
    for name, cell in fitted["cells"].items():
        g = "AB".index(name[0])
        s = "ab".index(name[1])
        cells[name] = {
            "alpha": cell["alpha"], "beta": cell["beta"],
            "cost": 1.0, "value": 2000.0 if g == s else 200.0,
        }
        diagnostics[name] = {k: cell[k] for k in
                             ("log_likelihood", "log_likelihood_mom", "n_samples")}
    payload = {
        "manifest": _manifest(args),
        "pi_A": fitted["pi_A"], "q_A": fitted["q_A"], "q_B": fitted["q_B"],
        "T": DEFAULT_T, "mode": "simulation",
        "cells": cells, "diagnostics": diagnostics,
    }
    _emit_json(payload, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairshare",
        description="Targeting optimization and simulation for two-group content propagation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_problem_flags(p):
        p.add_argument("--preset", help="built-in parameter set name")
        p.add_argument("--config", help="path to a parameter JSON file")
        p.add_argument("--horizon", type=int, help="override the time horizon T")

    p = sub.add_parser("solve", help="solve the targeting problem")
    add_problem_flags(p)
    p.add_argument("--mode", choices=("agnostic", "fair", "grid"), default="fair")
    p.add_argument("--delta-lo", type=float)
    p.add_argument("--delta-hi", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("sweep", help="solve over a grid of fairness bounds")
    add_problem_flags(p)
    p.add_argument("--delta-lo", required=True, help="grid: a,b,c or start:stop:count")
    p.add_argument("--delta-hi", required=True, help="grid: a,b,c or start:stop:count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo simulation of a policy")
    add_problem_flags(p)
    p.add_argument("--policy", default="opt",
                   help="opt, ratio, half, or explicit 'theta_Aa,theta_Ba'")
    p.add_argument("--mode", choices=("model", "one-to-one", "broadcast"),
                   default="model")
    p.add_argument("--delta-lo", type=float)
    p.add_argument("--delta-hi", type=float)
    p.add_argument("--graph", help="edge-list CSV (node_u,node_v)")
    p.add_argument("--graph-groups", help="node-group CSV (node,group)")
    p.add_argument("--mean-degree", type=float, default=27.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("--agents", type=int, default=100_000)
    p.add_argument("--out", default="sim_result.csv")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("fit", help="fit parameters from an event log")
    p.add_argument("events", help="event-log CSV path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_fit)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (DegenerateSample, NoEvents) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except InfeasibleProblem as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (FairshareError, ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
