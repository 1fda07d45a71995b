"""Synthetic two-block social graphs with controlled homophily.

Nodes are split into groups A and B; edges are wired as a stochastic
block model whose block probabilities are solved so that the expected
fraction of a g-node's neighbors inside g equals q_g. The graph is
undirected, without self-loops, stored as CSR adjacency for fast
neighbor queries during simulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleHomophily

__all__ = ["SocialGraph", "generate_synthetic_graph", "block_probabilities"]


@dataclass(frozen=True)
class SocialGraph:
    n: int
    group: np.ndarray  # (n,) int8, 0 = A, 1 = B
    indptr: np.ndarray  # CSR over sorted node ids
    indices: np.ndarray

    @property
    def n_edges(self) -> int:
        return self.indices.shape[0] // 2

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def realized_homophily(self) -> tuple[float, float]:
        """Mean intra-group neighbor fraction per group (degree-0 nodes skipped)."""
        deg = self.degrees()
        node_of = np.repeat(np.arange(self.n), deg)
        intra = self.group[self.indices] == self.group[node_of]
        same = np.bincount(node_of[intra], minlength=self.n).astype(float)
        out = []
        for g in range(2):
            mask = (self.group == g) & (deg > 0)
            out.append(float((same[mask] / deg[mask]).mean()) if mask.any() else float("nan"))
        return out[0], out[1]

    def edge_list(self) -> np.ndarray:
        """(m, 2) array of undirected edges with u < v."""
        u = np.repeat(np.arange(self.n), self.degrees())
        v = self.indices
        keep = u < v
        return np.column_stack([u[keep], v[keep]])


def block_probabilities(n_A: int, n_B: int, q_A: float, q_B: float,
                        mean_degree: float) -> tuple[float, float, float]:
    """Edge probabilities (p_AA, p_AB, p_BB) hitting the homophily targets.

    Group A's expected degree is pinned at mean_degree and split q_A /
    (1 - q_A) between intra and cross edges; p_BB is then forced by
    requiring B's intra fraction to equal q_B given the cross-edge load.
    """
    if n_A < 2 or n_B < 2:
        raise InfeasibleHomophily("each group needs at least 2 nodes")
    if not (0.0 < q_A <= 1.0 and 0.0 < q_B <= 1.0):
        raise InfeasibleHomophily(f"homophily targets ({q_A}, {q_B}) outside (0, 1]")
    p_AA = q_A * mean_degree / (n_A - 1)
    p_AB = (1.0 - q_A) * mean_degree / n_B
    if q_A == 1.0 or q_B == 1.0:
        # All cross edges vanish; both targets require the other's q = 1 too.
        if q_A != q_B:
            raise InfeasibleHomophily(
                "q = 1 for one group forces zero cross edges, so the other group's "
                "intra fraction is 1 regardless of its target"
            )
        p_BB = mean_degree / (n_B - 1)
        p_AB = 0.0
    else:
        cross_degree_B = n_A * p_AB  # expected cross edges per B node
        intra_degree_B = cross_degree_B * q_B / (1.0 - q_B)
        p_BB = intra_degree_B / (n_B - 1)
    for name, p in (("p_AA", p_AA), ("p_AB", p_AB), ("p_BB", p_BB)):
        if not (0.0 <= p <= 1.0):
            raise InfeasibleHomophily(
                f"{name} = {p:.4g} outside [0, 1] for n_A={n_A}, n_B={n_B}, "
                f"q=({q_A}, {q_B}), mean_degree={mean_degree}"
            )
    return p_AA, p_AB, p_BB


def _sample_distinct(rng: np.random.Generator, n_total: int, m: int) -> np.ndarray:
    """m distinct integers from [0, n_total) for m much smaller than n_total."""
    if m > n_total:
        raise ValueError("cannot sample more distinct pairs than exist")
    picked = np.unique(rng.integers(0, n_total, size=m))
    while picked.size < m:
        extra = rng.integers(0, n_total, size=2 * (m - picked.size) + 8)
        picked = np.unique(np.concatenate([picked, extra]))
    if picked.size > m:
        picked = rng.permutation(picked)[:m]
    return picked


def _triangular_pairs(idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Decode linear indices over the i<j upper triangle of an n x n grid."""
    # Row i covers indices [i*n - i*(i+1)/2, ...) of length n-1-i.
    i = (n - 2 - np.floor(
        np.sqrt(-8.0 * idx + 4.0 * n * (n - 1) - 7.0) / 2.0 - 0.5)).astype(np.int64)
    j = (idx + i + 1 - i * (2 * n - i - 1) // 2).astype(np.int64)
    return i, j


def generate_synthetic_graph(n: int, pi_A: float, q_A: float, q_B: float,
                             mean_degree: float, seed: int) -> SocialGraph:
    """Two-block random graph whose expected homophily matches (q_A, q_B)."""
    if n < 4:
        raise ValueError("graph needs at least 4 nodes")
    n_A = int(round(n * pi_A))
    n_A = min(max(n_A, 2), n - 2)
    n_B = n - n_A
    p_AA, p_AB, p_BB = block_probabilities(n_A, n_B, q_A, q_B, mean_degree)
    rng = np.random.default_rng(np.random.SeedSequence(seed))

    edges_u = []
    edges_v = []
    # Intra-A block.
    n_pairs = n_A * (n_A - 1) // 2
    m = rng.binomial(n_pairs, p_AA)
    if m:
        i, j = _triangular_pairs(_sample_distinct(rng, n_pairs, m), n_A)
        edges_u.append(i)
        edges_v.append(j)
    # Cross block: full n_A x n_B rectangle.
    if p_AB > 0.0:
        m = rng.binomial(n_A * n_B, p_AB)
        if m:
            idx = _sample_distinct(rng, n_A * n_B, m)
            edges_u.append(idx // n_B)
            edges_v.append(n_A + idx % n_B)
    # Intra-B block.
    n_pairs = n_B * (n_B - 1) // 2
    m = rng.binomial(n_pairs, p_BB)
    if m:
        i, j = _triangular_pairs(_sample_distinct(rng, n_pairs, m), n_B)
        edges_u.append(n_A + i)
        edges_v.append(n_A + j)

    if edges_u:
        u = np.concatenate(edges_u)
        v = np.concatenate(edges_v)
    else:
        u = np.empty(0, dtype=np.int64)
        v = np.empty(0, dtype=np.int64)

    group = np.zeros(n, dtype=np.int8)
    group[n_A:] = 1
    return graph_from_edges(n, group, u, v)


def graph_from_edges(n: int, group: np.ndarray, u: np.ndarray, v: np.ndarray) -> SocialGraph:
    """Build the CSR graph from an undirected edge list (self-loops rejected)."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    if np.any(u == v):
        raise ValueError("self-loops are not allowed")
    if u.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
        raise ValueError("edge endpoint outside [0, n)")
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    order = np.argsort(src, kind="stable")
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    indptr = np.cumsum(indptr)
    return SocialGraph(n=n, group=np.asarray(group, dtype=np.int8),
                       indptr=indptr, indices=dst)
