"""Mass dynamics of article propagation.

Ground truth is the one-step recursion

    l[g,s](1)   = pi_g * theta[g,s] * psi[g,s]
    l[g,s](t+1) = psi[g,s] * (q_g * l[g,s](t) + (1 - q_g') * l[g',s](t))

The mass at every t is linear in the targeting: l[g,s](t) =
theta[g,s] * w[g,s](t) + theta[g',s] * u[g,s](t), where w carries the
own-targeting response and u the cross-targeting response. Coefficients
can be extracted either by running the recursion on unit probes or from
the eigen-decomposition of the per-article 2x2 update matrix; both paths
are exposed and cross-validated in tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NearDefectiveMatrix
from .model import ModelParams, Targeting

__all__ = [
    "MassTrajectory",
    "PropagationCoefficients",
    "ExposureSeries",
    "propagate_recursive",
    "coefficients_recursive",
    "coefficients_closed_form",
    "coefficients",
    "exposure_series",
    "total_mass",
    "objective_coefficients",
]

_EIGEN_GAP_TOL = 1e-12


@dataclass(frozen=True)
class MassTrajectory:
    """Per-step masses l[t, group, article], t index 0 meaning t=1."""

    l: np.ndarray  # shape (T, 2, 2), nonnegative

    @property
    def T(self) -> int:
        return self.l.shape[0]

    def totals_per_cell(self) -> np.ndarray:
        """Sum over t: 2x2 array of total clicked-and-liked mass."""
        return self.l.sum(axis=0)

    def total(self) -> float:
        return float(self.l.sum())


@dataclass(frozen=True)
class PropagationCoefficients:
    """Linear response of the mass trajectory to the targeting.

    w[t, g, s] multiplies theta[g,s], u[t, g, s] multiplies theta[g',s].
    a1[s] > a2[s] > 0 are the decay rates of the per-article system.
    """

    w: np.ndarray  # (T, 2, 2)
    u: np.ndarray  # (T, 2, 2)
    a1: np.ndarray  # per article
    a2: np.ndarray

    @property
    def T(self) -> int:
        return self.w.shape[0]

    @property
    def sw(self) -> np.ndarray:
        """Sum over t of w, 2x2."""
        return self.w.sum(axis=0)

    @property
    def su(self) -> np.ndarray:
        """Sum over t of u, 2x2."""
        return self.u.sum(axis=0)

    def trajectory(self, theta: Targeting) -> MassTrajectory:
        """Reconstruct the mass trajectory for an arbitrary targeting."""
        th = theta.table()
        l = self.w * th[None, :, :] + self.u * th[None, ::-1, :]
        return MassTrajectory(l=l)


@dataclass(frozen=True)
class ExposureSeries:
    """Masses normalized by group share: e[t, g, s] = l[t, g, s] / pi_g."""

    e: np.ndarray


def _article_matrix(params: ModelParams, s: int) -> np.ndarray:
    """One-step update matrix of (l_A, l_B) for article s."""
    psi_A, psi_B = params.psi[0, s], params.psi[1, s]
    return np.array(
        [
            [psi_A * params.q_A, psi_A * (1.0 - params.q_B)],
            [psi_B * (1.0 - params.q_A), psi_B * params.q_B],
        ]
    )


def _propagate_article(params: ModelParams, s: int, theta_As: float, theta_Bs: float) -> np.ndarray:
    """Run the recursion for one article; returns (T, 2) with rows (l_A, l_B)."""
    T = params.horizon_T
    M = _article_matrix(params, s)
    out = np.empty((T, 2))
    out[0, 0] = params.pi_A * theta_As * params.psi[0, s]
    out[0, 1] = params.pi_B * theta_Bs * params.psi[1, s]
    for t in range(1, T):
        out[t] = M @ out[t - 1]
    return out


def propagate_recursive(params: ModelParams, theta: Targeting) -> MassTrajectory:
    """Exact O(T) evaluation of the mass recursion."""
    th = theta.table()
    l = np.empty((params.horizon_T, 2, 2))
    for s in range(2):
        l[:, :, s] = _propagate_article(params, s, th[0, s], th[1, s])
    return MassTrajectory(l=l)


def _eigenvalues(params: ModelParams, s: int) -> tuple[float, float]:
    """Decay rates a1 > a2 of the per-article system, from the quadratic."""
    psi_g, psi_o = params.psi[0, s], params.psi[1, s]
    tr = psi_g * params.q_A + psi_o * params.q_B
    det = psi_g * psi_o * (params.q_A + params.q_B - 1.0)
    disc = tr * tr - 4.0 * det
    root = np.sqrt(disc) if disc >= 0.0 else complex(0.0, np.sqrt(-disc))
    a1 = 0.5 * (tr + root)
    a2 = tr - a1
    return a1, a2


def coefficients_recursive(params: ModelParams) -> PropagationCoefficients:
    """Extract (w, u) by running the recursion on unit targeting probes.

    The probe theta[g,s]=1, theta[g',s]=0 yields l[g,s] = w[g,s] and
    l[g',s] = u[g',s] directly by linearity.
    """
    T = params.horizon_T
    w = np.empty((T, 2, 2))
    u = np.empty((T, 2, 2))
    a1 = np.empty(2)
    a2 = np.empty(2)
    for s in range(2):
        probe_A = _propagate_article(params, s, 1.0, 0.0)
        probe_B = _propagate_article(params, s, 0.0, 1.0)
        w[:, 0, s] = probe_A[:, 0]
        u[:, 1, s] = probe_A[:, 1]
        w[:, 1, s] = probe_B[:, 1]
        u[:, 0, s] = probe_B[:, 0]
        e1, e2 = _eigenvalues(params, s)
        a1[s], a2[s] = np.real(e1), np.real(e2)
    return PropagationCoefficients(w=w, u=u, a1=a1, a2=a2)


def coefficients_closed_form(params: ModelParams) -> PropagationCoefficients:
    """Extract (w, u) from the eigen-decomposition of the update matrix.

    Amplitudes are solved from the t=1 initial conditions w(1) = pi*psi,
    u(1) = 0 rather than taken from any printed constants; this is the
    form consistent with the recursion (see tests).
    """
    T = params.horizon_T
    w = np.empty((T, 2, 2))
    u = np.empty((T, 2, 2))
    a1 = np.empty(2)
    a2 = np.empty(2)
    t_idx = np.arange(T)
    for s in range(2):
        e1, e2 = _eigenvalues(params, s)
        if abs(e1 - e2) < _EIGEN_GAP_TOL or np.iscomplex(e1):
            raise NearDefectiveMatrix(
                f"article {s}: eigenvalue gap |{e1} - {e2}| below tolerance; "
                "use coefficients_recursive"
            )
        a1[s], a2[s] = float(np.real(e1)), float(np.real(e2))
        M = _article_matrix(params, s)
        eigvals = np.array([a1[s], a2[s]])
        # Eigenvectors as columns; rows of M are [psi_g*q_g, psi_g*(1-q_o)].
        V = np.empty((2, 2))
        for k, a in enumerate(eigvals):
            # (M - aI) v = 0; first row gives v up to scale.
            v = np.array([M[0, 1], a - M[0, 0]])
            if np.allclose(v, 0.0):
                v = np.array([a - M[1, 1], M[1, 0]])
            V[:, k] = v / np.linalg.norm(v)
        powers = eigvals[None, :] ** t_idx[:, None]  # (T, 2)
        for probe_group in range(2):
            x1 = np.zeros(2)
            x1[probe_group] = params.pi[probe_group] * params.psi[probe_group, s]
            alpha = np.linalg.solve(V, x1)
            series = powers @ (V * alpha[None, :]).T  # (T, 2): rows per t, cols per group
            if probe_group == 0:
                w[:, 0, s] = series[:, 0]
                u[:, 1, s] = series[:, 1]
            else:
                w[:, 1, s] = series[:, 1]
                u[:, 0, s] = series[:, 0]
    return PropagationCoefficients(w=w, u=u, a1=a1, a2=a2)


def coefficients(params: ModelParams) -> PropagationCoefficients:
    """Closed-form coefficients with automatic fallback to the recursion."""
    try:
        return coefficients_closed_form(params)
    except NearDefectiveMatrix:
        return coefficients_recursive(params)


def exposure_series(traj: MassTrajectory, params: ModelParams) -> ExposureSeries:
    """Normalize each group's masses by its population share."""
    if params.pi_A <= 0.0 or params.pi_B <= 0.0:
        raise ValueError("group shares must be positive")
    return ExposureSeries(e=traj.l / params.pi[None, :, None])


def objective_coefficients(coeffs: PropagationCoefficients) -> tuple[float, float, float]:
    """Linear form of total engagement: c_Aa*theta_Aa + c_Ba*theta_Ba + const."""
    sw, su = coeffs.sw, coeffs.su
    c_Aa = sw[0, 0] - sw[0, 1] + su[1, 0] - su[1, 1]
    c_Ba = su[0, 0] - su[0, 1] + sw[1, 0] - sw[1, 1]
    const = sw[0, 1] + su[0, 1] + sw[1, 1] + su[1, 1]
    return float(c_Aa), float(c_Ba), float(const)


def total_mass(coeffs: PropagationCoefficients, theta: Targeting) -> float:
    """Total clicked-and-liked mass over the horizon for a targeting."""
    c_Aa, c_Ba, const = objective_coefficients(coeffs)
    return c_Aa * theta.theta_A_a + c_Ba * theta.theta_B_a + const
