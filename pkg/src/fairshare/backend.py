"""Hot simulation kernels with switchable numba/numpy implementations.

All randomness is drawn up front with numpy Generators and passed into
the kernels as arrays, so the two backends are bit-identical; the kernels
only count and select. Backend choice: the FAIRSHARE_BACKEND environment
variable ("numba" or "numpy"), defaulting to numba when importable.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["active_backend", "step_counts", "resolve_collisions"]


def _requested_backend() -> str:
    choice = os.environ.get("FAIRSHARE_BACKEND", "").strip().lower()
    if choice in ("numba", "numpy"):
        return choice
    if choice:
        raise ValueError(f"FAIRSHARE_BACKEND must be 'numba' or 'numpy', got {choice!r}")
    return "auto"


_HAVE_NUMBA = False
if _requested_backend() in ("numba", "auto"):
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:
        if _requested_backend() == "numba":
            raise


def active_backend() -> str:
    """Name of the kernel implementation in use."""
    return "numba" if _HAVE_NUMBA else "numpy"


def _step_counts_numpy(p, u_like, u_group, tau, q_same):
    clicked = p >= tau
    liked = clicked & (u_like < p)
    same = int(np.count_nonzero(u_group[liked] < q_same))
    return int(np.count_nonzero(clicked)), int(np.count_nonzero(liked)), same


def _resolve_collisions_numpy(targets_perm, articles_perm):
    # np.unique keeps the first occurrence, which after the caller's
    # permutation is a uniform choice among colliding arrivals.
    uniq, idx = np.unique(targets_perm, return_index=True)
    return uniq, articles_perm[idx]


if _HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _step_counts_numba(p, u_like, u_group, tau, q_same):  # pragma: no cover
        n_click = 0
        n_like = 0
        n_same = 0
        for i in range(p.shape[0]):
            if p[i] >= tau:
                n_click += 1
                if u_like[i] < p[i]:
                    n_like += 1
                    if u_group[i] < q_same:
                        n_same += 1
        return n_click, n_like, n_same

    @njit(cache=True, nogil=True)
    def _resolve_collisions_numba(targets_perm, articles_perm):  # pragma: no cover
        n = targets_perm.shape[0]
        order = np.argsort(targets_perm, kind="mergesort")
        out_t = np.empty(n, dtype=targets_perm.dtype)
        out_a = np.empty(n, dtype=articles_perm.dtype)
        m = 0
        prev = -1
        for k in range(n):
            i = order[k]
            t = targets_perm[i]
            if t != prev:
                out_t[m] = t
                out_a[m] = articles_perm[i]
                m += 1
                prev = t
        return out_t[:m], out_a[:m]


def step_counts(p, u_like, u_group, tau: float, q_same: float) -> tuple[int, int, int]:
    """Clicked/liked/same-group-successor counts for one (group, article) cell.

    p are the drawn like probabilities of the shown agents; u_like and
    u_group are iid uniforms, indexed per agent. An agent clicks iff
    p >= tau, likes with probability p given a click, and a liker's
    successor stays in-group with probability q_same.
    """
    if _HAVE_NUMBA:
        return _step_counts_numba(p, u_like, u_group, tau, q_same)
    return _step_counts_numpy(p, u_like, u_group, tau, q_same)


def resolve_collisions(targets_perm, articles_perm):
    """Keep one arrival per target node: the first in the permuted order.

    Inputs must already be permuted uniformly at random by the caller.
    Returns (unique targets sorted ascending, the article each kept).
    """
    targets_perm = np.ascontiguousarray(targets_perm)
    articles_perm = np.ascontiguousarray(articles_perm)
    if _HAVE_NUMBA:
        return _resolve_collisions_numba(targets_perm, articles_perm)
    return _resolve_collisions_numpy(targets_perm, articles_perm)
