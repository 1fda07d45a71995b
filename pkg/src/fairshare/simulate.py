"""Monte Carlo validation of the analytic mass dynamics.

Two simulators share one harness: an agent-based mass-model simulator
that discretizes the unit population into n agents and follows the
analytic process exactly, and a graph simulator that propagates articles
over an explicit social network in one-to-one or broadcast sharing mode.

Determinism contract: each trial draws from its own
SeedSequence(master_seed, spawn_key=(trial,)) stream and trials are
assembled by index, so results are bit-identical for a given master seed
regardless of worker count or backend.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .backend import resolve_collisions, step_counts
from .fairness import FairnessBounds
from .graphs import SocialGraph
from .model import ModelParams, Targeting
from .optimizer import solve_agnostic, solve_fair
from .presets import DEFAULT_AGENTS, DEFAULT_T, DEFAULT_TRIALS
from .propagation import PropagationCoefficients

__all__ = [
    "SimConfig",
    "SimResult",
    "simulate_mass_model",
    "simulate_graph",
    "disparity_metrics",
    "resolve_policy",
    "empirical_pof",
]

_GROUPS = ("A", "B")
_ARTICLES = ("a", "b")


@dataclass(frozen=True)
class SimConfig:
    n_agents: int = DEFAULT_AGENTS
    trials: int = DEFAULT_TRIALS
    horizon_T: int = DEFAULT_T
    master_seed: int = 0

    def __post_init__(self):
        if self.n_agents < 1 or self.trials < 1 or self.horizon_T < 1:
            raise ValueError("n_agents, trials and horizon_T must all be positive")


@dataclass(frozen=True)
class SimResult:
    """Per-trial, per-step counts indexed [trial, t, group, article]."""

    shown: np.ndarray
    clicked: np.ndarray
    liked: np.ndarray
    n_agents: int

    @property
    def trials(self) -> int:
        return self.shown.shape[0]

    def empirical_mass(self) -> np.ndarray:
        """Mean liked fraction of the unit population, shape (T, 2, 2).

        Comparable directly to the analytic per-step masses.
        """
        return self.liked.mean(axis=0) / self.n_agents

    def mass_standard_error(self) -> np.ndarray:
        sd = self.liked.std(axis=0, ddof=1) / self.n_agents
        return sd / np.sqrt(self.trials)

    def write_csv(self, path, header_lines=()):
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("trial,t,group,article,shown,clicked,liked\n")
            T = self.shown.shape[1]
            for trial in range(self.trials):
                for t in range(T):
                    for g in range(2):
                        for s in range(2):
                            fh.write(
                                f"{trial},{t + 1},{_GROUPS[g]},{_ARTICLES[s]},"
                                f"{self.shown[trial, t, g, s]},"
                                f"{self.clicked[trial, t, g, s]},"
                                f"{self.liked[trial, t, g, s]}\n"
                            )


def _apportion(total: int, weights) -> np.ndarray:
    """Integer split of total proportional to weights, largest remainder."""
    w = np.asarray(weights, dtype=float)
    ideal = total * w / w.sum()
    base = np.floor(ideal).astype(np.int64)
    short = total - int(base.sum())
    if short:
        order = np.argsort(-(ideal - base), kind="stable")
        base[order[:short]] += 1
    return base


def _worker_count() -> int:
    raw = os.environ.get("FAIRSHARE_THREADS", "").strip()
    if raw:
        return max(1, int(raw))
    return min(8, os.cpu_count() or 1)


def _run_trials(trial_fn, cfg: SimConfig, n_agents: int) -> SimResult:
    def run(i):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=cfg.master_seed, spawn_key=(i,))
        )
        return trial_fn(rng)

    with ThreadPoolExecutor(max_workers=_worker_count()) as ex:
        results = list(ex.map(run, range(cfg.trials)))
    shown = np.stack([r[0] for r in results])
    clicked = np.stack([r[1] for r in results])
    liked = np.stack([r[2] for r in results])
    return SimResult(shown=shown, clicked=clicked, liked=liked, n_agents=n_agents)


def _trial_mass_model(prefs, params: ModelParams, theta: Targeting, cfg: SimConfig, rng):
    T = cfg.horizon_T
    shown = np.zeros((T, 2, 2), dtype=np.int64)
    clicked = np.zeros((T, 2, 2), dtype=np.int64)
    liked = np.zeros((T, 2, 2), dtype=np.int64)
    th = theta.table()
    n_group = _apportion(cfg.n_agents, params.pi)
    cur = np.zeros((2, 2), dtype=np.int64)
    for g in range(2):
        cur[g] = _apportion(int(n_group[g]), th[g])
    q = params.q
    for t in range(T):
        nxt = np.zeros((2, 2), dtype=np.int64)
        for g in range(2):
            for s in range(2):
                k = int(cur[g, s])
                shown[t, g, s] = k
                if k == 0:
                    continue
                spec = prefs[g][s]
                p = rng.beta(spec.alpha, spec.beta, size=k)
                u_like = rng.random(k)
                u_group = rng.random(k)
                n_click, n_like, n_same = step_counts(
                    p, u_like, u_group, spec.threshold, q[g]
                )
                clicked[t, g, s] = n_click
                liked[t, g, s] = n_like
                nxt[g, s] += n_same
                nxt[1 - g, s] += n_like - n_same
        cur = nxt
    return shown, clicked, liked


def simulate_mass_model(prefs, params: ModelParams, theta: Targeting,
                        cfg: SimConfig) -> SimResult:
    """Agent-based run of the analytic propagation process.

    Each agent independently draws its like probability from its cell's
    Beta distribution, clicks iff the value-weighted probability clears
    the cost, likes with that probability, and on a like spawns one
    successor shown the same article (in-group with probability q_g).
    """
    return _run_trials(
        lambda rng: _trial_mass_model(prefs, params, theta, cfg, rng),
        cfg, cfg.n_agents,
    )


def _trial_graph(graph: SocialGraph, prefs, theta: Targeting, cfg: SimConfig,
                 rng, broadcast: bool):
    T = cfg.horizon_T
    shown = np.zeros((T, 2, 2), dtype=np.int64)
    clicked = np.zeros((T, 2, 2), dtype=np.int64)
    liked = np.zeros((T, 2, 2), dtype=np.int64)
    th = theta.table()

    # Initial exposure: a random theta-fraction of each group sees a.
    nodes_parts = []
    art_parts = []
    for g in range(2):
        members = rng.permutation(np.flatnonzero(graph.group == g))
        k_a = int(_apportion(members.size, th[g])[0])
        nodes_parts.append(members)
        arts = np.ones(members.size, dtype=np.int64)
        arts[:k_a] = 0
        art_parts.append(arts)
    cur_nodes = np.concatenate(nodes_parts)
    cur_art = np.concatenate(art_parts)

    for t in range(T):
        targets_parts = []
        arts_parts = []
        for g in range(2):
            for s in range(2):
                sel = cur_nodes[(graph.group[cur_nodes] == g) & (cur_art == s)]
                sel = np.sort(sel)
                k = sel.size
                shown[t, g, s] = k
                if k == 0:
                    continue
                spec = prefs[g][s]
                p = rng.beta(spec.alpha, spec.beta, size=k)
                u_like = rng.random(k)
                click = p >= spec.threshold
                like = click & (u_like < p)
                clicked[t, g, s] = int(np.count_nonzero(click))
                liked[t, g, s] = int(np.count_nonzero(like))
                likers = sel[like]
                deg = graph.indptr[likers + 1] - graph.indptr[likers]
                likers = likers[deg > 0]
                deg = deg[deg > 0]
                if likers.size == 0:
                    continue
                if broadcast:
                    starts = graph.indptr[likers]
                    pos = np.repeat(starts, deg) + (
                        np.arange(int(deg.sum())) - np.repeat(np.cumsum(deg) - deg, deg)
                    )
                    tgt = graph.indices[pos]
                else:
                    off = rng.integers(0, deg)
                    tgt = graph.indices[graph.indptr[likers] + off]
                targets_parts.append(tgt)
                arts_parts.append(np.full(tgt.size, s, dtype=np.int64))
        if not targets_parts:
            cur_nodes = np.empty(0, dtype=np.int64)
            cur_art = np.empty(0, dtype=np.int64)
            continue
        targets = np.concatenate(targets_parts)
        arts = np.concatenate(arts_parts)
        # Each node reads at most one article per step; the survivor among
        # colliding arrivals is uniform thanks to the permutation.
        perm = rng.permutation(targets.size)
        cur_nodes, cur_art = resolve_collisions(targets[perm], arts[perm])
    return shown, clicked, liked


def simulate_graph(graph: SocialGraph, prefs, theta: Targeting, cfg: SimConfig,
                   mode: str = "one_to_one") -> SimResult:
    """Propagation over an explicit network.

    mode "one_to_one": each liker forwards to one uniformly chosen
    neighbor, mirroring the analytic model's single-successor process.
    mode "broadcast": each liker forwards to all neighbors.
    """
    if mode not in ("one_to_one", "broadcast"):
        raise ValueError(f"mode must be 'one_to_one' or 'broadcast', got {mode!r}")
    if graph.n == 0:
        raise ValueError("graph is empty")
    broadcast = mode == "broadcast"
    return _run_trials(
        lambda rng: _trial_graph(graph, prefs, theta, cfg, rng, broadcast),
        cfg, graph.n,
    )


def disparity_metrics(result: SimResult) -> dict:
    """Per-trial disparity summaries used for the box-plot grids.

    exposure_gap / like_gap: |article-a total - article-b total| en masse.
    intergroup_exposure / intergroup_likes: per-trial out-group totals for
    each group, plus the absolute gap between them.
    """
    def per_trial(counts):
        tot = counts.sum(axis=1)  # (trials, 2, 2)
        gap = np.abs(tot[:, :, 0].sum(axis=1) - tot[:, :, 1].sum(axis=1))
        out_A = tot[:, 0, 1]
        out_B = tot[:, 1, 0]
        return gap, out_A, out_B

    exp_gap, exp_out_A, exp_out_B = per_trial(result.shown)
    like_gap, like_out_A, like_out_B = per_trial(result.liked)

    def quartiles(x):
        return [float(v) for v in np.percentile(x, [25, 50, 75])]

    return {
        "exposure_gap": exp_gap,
        "like_gap": like_gap,
        "intergroup_exposure": {"A": exp_out_A, "B": exp_out_B,
                                "gap": np.abs(exp_out_A - exp_out_B)},
        "intergroup_likes": {"A": like_out_A, "B": like_out_B,
                             "gap": np.abs(like_out_A - like_out_B)},
        "quartiles": {
            "exposure_gap": quartiles(exp_gap),
            "like_gap": quartiles(like_gap),
        },
    }


def resolve_policy(coeffs: PropagationCoefficients, bounds: FairnessBounds | None,
                   policy) -> Targeting:
    """Map a policy name to a concrete targeting.

    "opt" is the unconstrained corner optimum, "ratio" the fair-exposure
    optimum (requires bounds), "half" the uniform 50/50 split; a Targeting
    passes through unchanged.
    """
    if isinstance(policy, Targeting):
        return policy
    if policy == "opt":
        return solve_agnostic(coeffs).theta
    if policy == "half":
        return Targeting(0.5, 0.5)
    if policy == "ratio":
        if bounds is None:
            raise ValueError("policy 'ratio' needs fairness bounds")
        sol = solve_fair(coeffs, bounds)
        if not sol.feasible:
            raise ValueError("policy 'ratio' infeasible for these bounds")
        return sol.theta
    raise ValueError(f"unknown policy {policy!r}")


def empirical_pof(opt_result: SimResult, policy_result: SimResult) -> float:
    """Ratio of mean total clicks under the unconstrained optimum vs. a policy."""
    num = opt_result.clicked.sum(axis=(1, 2, 3)).mean()
    den = policy_result.clicked.sum(axis=(1, 2, 3)).mean()
    if den <= 0:
        raise ValueError("policy run produced no clicks")
    return float(num / den)
