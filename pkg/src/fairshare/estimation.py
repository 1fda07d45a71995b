"""Parameter fitting from propagation event logs.

An event log is one row per share: who shared (group), who received
(group), which article, whether the receiver clicked and liked, and
optionally the receiver's drawn like probability. Beta shapes are fitted
per (group, article) cell by maximum likelihood; homophily by the
intra-group share fraction.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .errors import DegenerateSample, NoEvents
from .model import PreferenceSpec
from .presets import preset  # re-exported: presets are compiled-in "fits"

__all__ = [
    "EventLog",
    "fit_beta_mle",
    "fit_homophily",
    "like_prob_samples",
    "fit_all",
    "generate_event_log",
    "preset",
]

_CLIP = 1e-6
_GROUP_CODE = {"A": 0, "B": 1}
_ARTICLE_CODE = {"a": 0, "b": 1}


@dataclass
class EventLog:
    """Columnar share-event log; all arrays share one length."""

    t: np.ndarray
    sharer_group: np.ndarray  # 0/1
    receiver_group: np.ndarray
    article: np.ndarray
    clicked: np.ndarray  # bool
    liked: np.ndarray
    like_prob_sample: np.ndarray | None = None  # nan where absent
    user: np.ndarray | None = None  # receiver id, enables per-user rates

    def __post_init__(self):
        n = len(self.t)
        for name in ("sharer_group", "receiver_group", "article", "clicked", "liked"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"column {name} length mismatch")
        if np.any(self.liked & ~self.clicked):
            raise ValueError("liked without clicked violates the event model")

    def __len__(self):
        return len(self.t)

    @classmethod
    def read_csv(cls, path) -> "EventLog":
        rows = []
        with open(path) as fh:
            reader = csv.DictReader(r for r in fh if not r.startswith("#"))
            if reader.fieldnames is None:
                raise ValueError(f"{path}: empty event log")
            required = {"t", "sharer_group", "receiver_group", "article", "clicked", "liked"}
            missing = required - set(reader.fieldnames)
            if missing:
                raise ValueError(f"{path}: missing columns {sorted(missing)}")
            has_p = "like_prob_sample" in reader.fieldnames
            has_user = "user" in reader.fieldnames
            for row in reader:
                rows.append(row)
        if not rows:
            raise ValueError(f"{path}: no event rows")

        def col(key, conv):
            return np.array([conv(r[key]) for r in rows])

        as_bool = lambda v: v.strip().lower() in ("1", "true")
        return cls(
            t=col("t", int),
            sharer_group=col("sharer_group", lambda v: _GROUP_CODE[v.strip()]),
            receiver_group=col("receiver_group", lambda v: _GROUP_CODE[v.strip()]),
            article=col("article", lambda v: _ARTICLE_CODE[v.strip()]),
            clicked=col("clicked", as_bool),
            liked=col("liked", as_bool),
            like_prob_sample=(
                col("like_prob_sample", lambda v: float(v) if v.strip() else np.nan)
                if has_p else None
            ),
            user=col("user", int) if has_user else None,
        )

    def write_csv(self, path, header_lines=()):
        inv_g = {v: k for k, v in _GROUP_CODE.items()}
        inv_s = {v: k for k, v in _ARTICLE_CODE.items()}
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            cols = ["t", "sharer_group", "receiver_group", "article", "clicked", "liked"]
            if self.like_prob_sample is not None:
                cols.append("like_prob_sample")
            if self.user is not None:
                cols.append("user")
            fh.write(",".join(cols) + "\n")
            for i in range(len(self)):
                vals = [
                    str(int(self.t[i])),
                    inv_g[int(self.sharer_group[i])],
                    inv_g[int(self.receiver_group[i])],
                    inv_s[int(self.article[i])],
                    str(int(self.clicked[i])),
                    str(int(self.liked[i])),
                ]
                if self.like_prob_sample is not None:
                    p = self.like_prob_sample[i]
                    vals.append("" if np.isnan(p) else f"{p:.10g}")
                if self.user is not None:
                    vals.append(str(int(self.user[i])))
                fh.write(",".join(vals) + "\n")


def _beta_nll_grad(theta_log, mean_log_x, mean_log_1mx):
    a, b = np.exp(theta_log)
    nll = special.betaln(a, b) - (a - 1.0) * mean_log_x - (b - 1.0) * mean_log_1mx
    da = special.digamma(a) - special.digamma(a + b) - mean_log_x
    db = special.digamma(b) - special.digamma(a + b) - mean_log_1mx
    # Chain rule through the log parametrization.
    return nll, np.array([da * a, db * b])


def fit_beta_mle(samples, return_diagnostics: bool = False):
    """Maximum-likelihood Beta shapes for samples in (0, 1).

    Boundary values are clipped to [1e-6, 1 - 1e-6] with a warning;
    identical samples raise DegenerateSample. Initialization is method of
    moments; the optimum is polished with Newton steps until the gradient
    norm drops below 1e-8.
    """
    x = np.asarray(list(samples), dtype=float)
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    if np.any((x < 0.0) | (x > 1.0)):
        raise ValueError("samples must lie in [0, 1]")
    if np.any((x <= 0.0) | (x >= 1.0)):
        warnings.warn("boundary like-probability samples clipped to (0, 1)")
        x = np.clip(x, _CLIP, 1.0 - _CLIP)
    if np.ptp(x) == 0.0:
        raise DegenerateSample("all samples identical; Beta shapes unidentifiable")

    m, v = float(x.mean()), float(x.var())
    # Method of moments; guard tiny variances.
    v = max(v, 1e-12)
    common = max(m * (1.0 - m) / v - 1.0, 1e-3)
    a0, b0 = max(m * common, 1e-3), max((1.0 - m) * common, 1e-3)
    mean_log_x = float(np.mean(np.log(x)))
    mean_log_1mx = float(np.mean(np.log1p(-x)))

    res = optimize.minimize(
        _beta_nll_grad, np.log([a0, b0]), args=(mean_log_x, mean_log_1mx),
        jac=True, method="L-BFGS-B",
    )
    a, b = np.exp(res.x)
    # Newton polish on (a, b) directly; the Hessian is the trigamma matrix.
    for _ in range(60):
        g = np.array([
            special.digamma(a) - special.digamma(a + b) - mean_log_x,
            special.digamma(b) - special.digamma(a + b) - mean_log_1mx,
        ])
        if np.linalg.norm(g) <= 1e-8:
            break
        tg_ab = special.polygamma(1, a + b)
        H = np.array([
            [special.polygamma(1, a) - tg_ab, -tg_ab],
            [-tg_ab, special.polygamma(1, b) - tg_ab],
        ])
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        scale = 1.0
        while (a - scale * step[0] <= 0.0) or (b - scale * step[1] <= 0.0):
            scale *= 0.5
        a, b = a - scale * step[0], b - scale * step[1]

    if not return_diagnostics:
        return float(a), float(b)
    ll = float(-((special.betaln(a, b)
                  - (a - 1.0) * mean_log_x - (b - 1.0) * mean_log_1mx)) * x.size)
    ll_mom = float(-((special.betaln(a0, b0)
                      - (a0 - 1.0) * mean_log_x - (b0 - 1.0) * mean_log_1mx)) * x.size)
    return float(a), float(b), {"log_likelihood": ll, "log_likelihood_mom": ll_mom,
                                "n_samples": int(x.size)}


def fit_homophily(log: EventLog) -> tuple[float, float]:
    """Intra-group share fraction per sharer group."""
    out = []
    for g, name in ((0, "A"), (1, "B")):
        mask = log.sharer_group == g
        n = int(np.count_nonzero(mask))
        if n == 0:
            raise NoEvents(f"no share events with sharer group {name}")
        q = float(np.count_nonzero(log.receiver_group[mask] == g)) / n
        if not (0.5 < q < 1.0):
            warnings.warn(
                f"fitted q_{name} = {q:.4g} outside the homophily range (1/2, 1)"
            )
        out.append(q)
    return out[0], out[1]


def like_prob_samples(log: EventLog, g: int, s: int, min_clicks: int = 5) -> np.ndarray:
    """Like-probability samples for one (group, article) cell.

    Prefers the logged like_prob_sample column; otherwise falls back to
    per-user empirical like rates (likes/clicks over users with at least
    min_clicks clicks), which needs the optional user column.
    """
    mask = (log.receiver_group == g) & (log.article == s)
    if log.like_prob_sample is not None:
        vals = log.like_prob_sample[mask]
        vals = vals[~np.isnan(vals)]
        if vals.size:
            return vals
    if log.user is None:
        raise NoEvents(
            "no like_prob_sample values and no user column for the rate fallback"
        )
    users = log.user[mask]
    clicked = log.clicked[mask].astype(float)
    liked = log.liked[mask].astype(float)
    uniq, inv = np.unique(users, return_inverse=True)
    clicks = np.bincount(inv, weights=clicked)
    likes = np.bincount(inv, weights=liked)
    ok = clicks >= min_clicks
    if not ok.any():
        raise NoEvents(f"no user reaches {min_clicks} clicks in cell ({g}, {s})")
    return likes[ok] / clicks[ok]


def fit_all(log: EventLog, cost: float = 1.0, values=None) -> dict:
    """Fit homophily plus all four Beta cells; returns a config-style dict."""
    q_A, q_B = fit_homophily(log)
    # Sharer draws reflect the population split directly; receiver draws
    # are skewed by asymmetric homophily.
    pi_A = float(np.count_nonzero(log.sharer_group == 0)) / len(log)
    cells = {}
    for g in range(2):
        for s in range(2):
            a, b, diag = fit_beta_mle(like_prob_samples(log, g, s),
                                      return_diagnostics=True)
            cells[f"{'AB'[g]}{'ab'[s]}"] = {"alpha": a, "beta": b, **diag}
    return {"pi_A": pi_A, "q_A": q_A, "q_B": q_B, "cells": cells, "cost": cost}


def generate_event_log(prefs, pi_A: float, q_A: float, q_B: float,
                       n_events: int, seed: int, T: int = 1) -> EventLog:
    """Synthetic log with known ground truth, for round-trip testing."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    sharer = (rng.random(n_events) >= pi_A).astype(np.int64)
    q = np.where(sharer == 0, q_A, q_B)
    receiver = np.where(rng.random(n_events) < q, sharer, 1 - sharer)
    article = rng.integers(0, 2, size=n_events)
    p = np.empty(n_events)
    clicked = np.zeros(n_events, dtype=bool)
    for g in range(2):
        for s in range(2):
            mask = (receiver == g) & (article == s)
            k = int(np.count_nonzero(mask))
            if k == 0:
                continue
            spec: PreferenceSpec = prefs[g][s]
            p[mask] = rng.beta(spec.alpha, spec.beta, size=k)
            clicked[mask] = p[mask] >= spec.threshold
    liked = clicked & (rng.random(n_events) < p)
    return EventLog(
        t=rng.integers(1, T + 1, size=n_events),
        sharer_group=sharer,
        receiver_group=receiver,
        article=article,
        clicked=clicked,
        liked=liked,
        like_prob_sample=p,
        user=np.arange(n_events, dtype=np.int64),
    )
