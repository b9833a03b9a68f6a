"""Zero-mean Gaussian-state calculus on quadrature covariance matrices.

Convention: quadratures q = (a + a†)/√2, p = (a - a†)/(i√2), ordered
(q1, p1, ..., qn, pn). The vacuum covariance is (1/2)·I and a thermal state
with mean photon number K has symplectic eigenvalue K + 1/2, so its entropy
is g(K) bits. Displacements never enter: every entropy used here is
displacement-invariant.
"""

from __future__ import annotations

import numpy as np

from .errors import PhysicalityError
from .scalar import g_of

VACUUM_VARIANCE = 0.5
_NU_TOL = 1e-10


def vacuum_cov(n_modes: int = 1) -> np.ndarray:
    return VACUUM_VARIANCE * np.eye(2 * n_modes)


def thermal_cov(K: float) -> np.ndarray:
    """Single-mode thermal covariance, symplectic eigenvalue K + 1/2."""
    if K < 0:
        raise ValueError("mean photon number must be nonnegative")
    return (K + 0.5) * np.eye(2)


def squeezed_thermal_cov(K: float, r: float) -> np.ndarray:
    """Single-mode squeezed thermal state; entropy g(K) for every ``r``."""
    if K < 0:
        raise ValueError("mean photon number must be nonnegative")
    return (K + 0.5) * np.diag([np.exp(2 * r), np.exp(-2 * r)])


def two_mode_squeezed_thermal_cov(K: float, r: float) -> np.ndarray:
    """Two-mode squeezed thermal state with both symplectic eigenvalues K + 1/2.

    Joint entropy is 2 g(K) independent of ``r``; r = 0 gives the product of
    two thermal states.
    """
    if K < 0:
        raise ValueError("mean photon number must be nonnegative")
    nu = K + 0.5
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    V = nu * np.array([
        [ch, 0.0, sh, 0.0],
        [0.0, ch, 0.0, -sh],
        [sh, 0.0, ch, 0.0],
        [0.0, -sh, 0.0, ch],
    ])
    return V


def _check_cov(V: np.ndarray) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[0] != V.shape[1]:
        raise ValueError("covariance matrix must be square")
    if V.shape[0] % 2 != 0 or V.shape[0] == 0:
        raise ValueError("covariance matrix must be 2n x 2n")
    if not np.allclose(V, V.T, atol=1e-12, rtol=0.0):
        raise ValueError("covariance matrix must be symmetric within 1e-12")
    return V


def _symplectic_form(n_modes: int) -> np.ndarray:
    w = np.array([[0.0, 1.0], [-1.0, 0.0]])
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for m in range(n_modes):
        omega[2 * m: 2 * m + 2, 2 * m: 2 * m + 2] = w
    return omega


def symplectic_spectrum(V) -> np.ndarray:
    """Symplectic eigenvalues of a covariance matrix, sorted descending.

    For one mode this is √det(V); in general the moduli of the eigenvalues of
    iΩV, one per mode. Raises :class:`PhysicalityError` if any eigenvalue
    falls below the vacuum floor 1/2 (beyond a small tolerance).
    """
    V = _check_cov(V)
    n = V.shape[0] // 2
    if n == 1:
        det = float(np.linalg.det(V))
        if det < 0:
            raise PhysicalityError("covariance matrix has negative determinant")
        nus = np.array([np.sqrt(det)])
    else:
        omega = _symplectic_form(n)
        ev = np.linalg.eigvals(1j * omega @ V)
        nus = np.sort(np.abs(ev))[::-1][::2].copy()
    if np.any(nus < VACUUM_VARIANCE - _NU_TOL):
        raise PhysicalityError(
            f"symplectic eigenvalue {nus.min():.12g} below the vacuum floor 1/2")
    return nus


def gaussian_entropy(V) -> float:
    """Von Neumann entropy of a zero-mean Gaussian state, in bits."""
    nus = symplectic_spectrum(V)
    # clamp rounding just below the vacuum floor; genuine violations raised above
    x = np.maximum(nus - VACUUM_VARIANCE, 0.0)
    return float(np.sum(g_of(x)))


def bs_output_cov(Va, Vb, eta: float) -> np.ndarray:
    """Covariance of the transmitted beam-splitter output, η·Va + (1-η)·Vb.

    Inputs must be uncorrelated and have matching mode structure (the splitter
    acts mode-by-mode).
    """
    Va = _check_cov(Va)
    Vb = _check_cov(Vb)
    if Va.shape != Vb.shape:
        raise ValueError(f"covariance shapes differ: {Va.shape} vs {Vb.shape}")
    if not 0 <= eta <= 1:
        raise ValueError("transmissivity must lie in [0, 1]")
    return eta * Va + (1 - eta) * Vb


def wehrl_entropy_gaussian(V) -> float:
    """Wehrl entropy of a single-mode zero-mean Gaussian state, in nats.

    Differential entropy of the Husimi function over the α-plane; the Husimi
    covariance in α-coordinates is (V + I/2)/2 because q = √2·Re α.
    Vacuum gives 1 + ln π.
    """
    V = _check_cov(V)
    if V.shape != (2, 2):
        raise ValueError("wehrl_entropy_gaussian expects a single-mode matrix")
    symplectic_spectrum(V)  # physicality gate
    sigma_q = (V + VACUUM_VARIANCE * np.eye(2)) / 2.0
    det = float(np.linalg.det(sigma_q))
    return float(0.5 * np.log((2 * np.pi * np.e) ** 2 * det))


def conjecture2_gaussian_sweep(eta: float, K: float, r_grid,
                               entropy_kind: str = "von_neumann") -> np.ndarray:
    """Output entropy of (vacuum, squeezed-thermal(K, r)) across a squeeze grid.

    Every input in the sweep has entropy g(K); the returned table of rows
    (r, S_out) lets the caller confirm the minimum sits at r = 0 with value
    g((1-η)K). ``entropy_kind`` selects von Neumann (bits) or Wehrl (nats).
    """
    if not 0 < eta < 1:
        raise ValueError("transmissivity must lie in (0, 1) for the sweep")
    if K < 0:
        raise ValueError("mean photon number must be nonnegative")
    if entropy_kind not in ("von_neumann", "wehrl"):
        raise ValueError("entropy_kind must be 'von_neumann' or 'wehrl'")
    va = vacuum_cov(1)
    rows = []
    for r in np.asarray(r_grid, dtype=float):
        vc = bs_output_cov(va, squeezed_thermal_cov(K, r), eta)
        if entropy_kind == "von_neumann":
            s = gaussian_entropy(vc)
        else:
            s = wehrl_entropy_gaussian(vc)
        rows.append((float(r), s))
    return np.array(rows)


def strong_conj2_gaussian_check(eta: float, K: float, r_grid) -> np.ndarray:
    """Joint output entropy for two-mode squeezed thermal inputs, per squeeze.

    Each of the two modes passes its own transmissivity-η splitter against
    vacuum. The joint input entropy is 2 g(K) for every ``r``; the minimum of
    the returned (r, S_joint) table should be 2 g((1-η)K) at r = 0.
    """
    if not 0 < eta < 1:
        raise ValueError("transmissivity must lie in (0, 1)")
    if K < 0:
        raise ValueError("mean photon number must be nonnegative")
    va = vacuum_cov(2)
    rows = []
    for r in np.asarray(r_grid, dtype=float):
        vb = two_mode_squeezed_thermal_cov(K, r)
        vc = bs_output_cov(va, vb, eta)
        rows.append((float(r), gaussian_entropy(vc)))
    return np.array(rows)
