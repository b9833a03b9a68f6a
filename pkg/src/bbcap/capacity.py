"""Capacity regions of the lossy single-mode broadcast channel.

Boundary sweeps for the conjectured ultimate region and for coherent-state
encoding with homodyne or heterodyne detection, the Holevo information,
Fock-space verification of the single-use coherent-state region, and the
coherent-state multiple-access envelope used for the duality comparison.
All rates are bits per channel use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .fock import DensityMatrix, displaced_thermal, thermal_density, von_neumann_entropy
from .scalar import g_of

DEFAULT_BETA_STEPS = 201

DETECTIONS = ("ultimate", "homodyne", "heterodyne")
MAC_CONSTRAINTS = ("total_transmit", "total_receive", "per_user")


class RatePoint(NamedTuple):
    rb: float
    rc: float


@dataclass(frozen=True, eq=False)
class RegionCurve:
    """Sampled region boundary: Bob's rate rises and Charlie's falls along beta."""

    detection: str
    eta: float
    nbar: float
    betas: np.ndarray
    rb: np.ndarray
    rc: np.ndarray

    def __post_init__(self):
        if self.detection not in DETECTIONS:
            raise ValueError(f"unknown detection {self.detection!r}")
        if self.betas.ndim != 1 or self.betas.size < 2:
            raise ValueError("beta grid needs at least two points")
        if np.any(np.diff(self.betas) <= 0):
            raise ValueError("beta grid must be strictly increasing")
        if np.any(np.diff(self.rb) < -1e-12):
            raise ValueError("R_B must be nondecreasing in beta")
        if np.any(np.diff(self.rc) > 1e-12):
            raise ValueError("R_C must be nonincreasing in beta")

    def points(self):
        return [(float(b), RatePoint(float(x), float(y)))
                for b, x, y in zip(self.betas, self.rb, self.rc)]


@dataclass(frozen=True)
class EncodingParams:
    """Gaussian coherent-state encoding with power split ``beta``.

    The auxiliary center T is circular Gaussian with E|T|² = nbar and the
    conditional amplitude is centered on √(1-β)·t with variance β·nbar, which
    spends exactly the nbar photon budget.
    """

    nbar: float
    beta: float
    eta: float

    def __post_init__(self):
        if self.nbar < 0:
            raise ValueError("photon budget must be nonnegative")
        if not 0 <= self.beta <= 1:
            raise ValueError("power split beta must lie in [0, 1]")
        if not 0 <= self.eta <= 1:
            raise ValueError("transmissivity must lie in [0, 1]")

    @property
    def center_variance(self) -> float:
        return self.nbar

    @property
    def conditional_variance(self) -> float:
        return self.beta * self.nbar


def _require_degraded(eta: float):
    if not 0.5 < eta <= 1:
        raise ValueError(
            "broadcast sweeps need transmissivity > 1/2; for eta <= 1/2 swap the "
            "receiver roles so the less-noisy receiver sits on the transmitted port")


def _beta_grid(beta_grid) -> np.ndarray:
    if beta_grid is None:
        return np.linspace(0.0, 1.0, DEFAULT_BETA_STEPS)
    grid = np.asarray(beta_grid, dtype=float)
    if np.any(grid < 0) or np.any(grid > 1):
        raise ValueError("beta grid must lie in [0, 1]")
    return grid


def broadcast_region_ultimate(eta: float, nbar: float, beta_grid=None) -> RegionCurve:
    """Conjectured ultimate rate region boundary.

    R_B = g(ηβN̄) and R_C = g((1-η)N̄) - g((1-η)βN̄) for β in the grid.
    """
    _require_degraded(eta)
    if nbar < 0:
        raise ValueError("photon budget must be nonnegative")
    betas = _beta_grid(beta_grid)
    rb = g_of(eta * betas * nbar)
    rc = g_of((1 - eta) * nbar) - g_of((1 - eta) * betas * nbar)
    return RegionCurve("ultimate", eta, nbar, betas, np.atleast_1d(rb), np.atleast_1d(rc))


def broadcast_region_homodyne(eta: float, nbar: float, beta_grid=None) -> RegionCurve:
    """Coherent-state region with single-quadrature (homodyne) detection.

    Superposition coding on the induced scalar Gaussian broadcast channel:
    R_B = ½log2(1+4ηβN̄), R_C = ½log2(1 + 4(1-η)(1-β)N̄ / (1 + 4(1-η)βN̄)).
    """
    _require_degraded(eta)
    if nbar < 0:
        raise ValueError("photon budget must be nonnegative")
    betas = _beta_grid(beta_grid)
    rb = 0.5 * np.log2(1 + 4 * eta * betas * nbar)
    rc = 0.5 * np.log2(1 + 4 * (1 - eta) * (1 - betas) * nbar
                       / (1 + 4 * (1 - eta) * betas * nbar))
    return RegionCurve("homodyne", eta, nbar, betas, rb, rc)


def broadcast_region_heterodyne(eta: float, nbar: float, beta_grid=None) -> RegionCurve:
    """Coherent-state region with two-quadrature (heterodyne) detection.

    R_B = log2(1+ηβN̄), R_C = log2(1 + (1-η)(1-β)N̄ / (1 + (1-η)βN̄)).
    """
    _require_degraded(eta)
    if nbar < 0:
        raise ValueError("photon budget must be nonnegative")
    betas = _beta_grid(beta_grid)
    rb = np.log2(1 + eta * betas * nbar)
    rc = np.log2(1 + (1 - eta) * (1 - betas) * nbar / (1 + (1 - eta) * betas * nbar))
    return RegionCurve("heterodyne", eta, nbar, betas, rb, rc)


def broadcast_region(detection: str, eta: float, nbar: float, beta_grid=None) -> RegionCurve:
    if detection == "ultimate":
        return broadcast_region_ultimate(eta, nbar, beta_grid)
    if detection == "homodyne":
        return broadcast_region_homodyne(eta, nbar, beta_grid)
    if detection == "heterodyne":
        return broadcast_region_heterodyne(eta, nbar, beta_grid)
    raise ValueError(f"unknown detection {detection!r}")


def holevo_information(priors, states) -> float:
    """Holevo information S(Σ p ρ) - Σ p S(ρ) of an ensemble, in bits."""
    p = np.asarray(priors, dtype=float)
    if p.ndim != 1 or len(states) != p.size:
        raise ValueError("priors and states must have matching lengths")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("priors must form a probability distribution")
    dims = {s.dim for s in states}
    if len(dims) != 1:
        raise ValueError("all states must share one dimension")
    avg = sum(w * s.mat for w, s in zip(p, states))
    mixed = DensityMatrix(avg, dims=states[0].dims)
    cond = sum(w * von_neumann_entropy(s) for w, s in zip(p, states))
    return von_neumann_entropy(mixed) - cond


@dataclass(frozen=True)
class CoherentVerification:
    """Residuals of the closed-form coherent-state rate bounds at one beta."""

    eta: float
    nbar: float
    beta: float
    D: int
    t_samples: int
    seed: int
    threshold: float
    residual_bob: tuple
    residual_charlie_mixture: float
    residual_charlie_conditional: tuple
    max_residual: float
    passed: bool


def verify_coherent_region_numeric(eta: float, nbar: float, beta: float, D: int,
                                   t_samples: int = 5, seed: int = 0,
                                   threshold: float = 1e-4) -> CoherentVerification:
    """Check the coherent-state encoding entropies against their closed forms.

    For centers t drawn from the encoding distribution this verifies, in the
    truncated Fock space: (i) Bob's conditional output is displaced thermal
    with entropy g(ηβN̄) independent of t; (ii) Charlie's unconditional output
    is thermal with entropy g((1-η)N̄); (iii) Charlie's conditional entropy is
    g((1-η)βN̄). Returns the residual report rather than asserting, so a
    failure is visible, not silent.
    """
    _require_degraded(eta)
    params = EncodingParams(nbar=nbar, beta=beta, eta=eta)
    rng = np.random.default_rng(seed)
    ts = (rng.standard_normal(t_samples) + 1j * rng.standard_normal(t_samples))
    ts = ts * np.sqrt(params.center_variance / 2.0)

    kb = eta * beta * nbar
    res_bob = []
    for t in ts:
        rho = displaced_thermal(np.sqrt(eta) * np.sqrt(1 - beta) * t, kb, D)
        res_bob.append(abs(von_neumann_entropy(rho) - g_of(kb)))

    kc_mix = (1 - eta) * nbar
    rho_mix = thermal_density(kc_mix, D)
    res_mix = abs(von_neumann_entropy(rho_mix) - g_of(kc_mix))

    kc = (1 - eta) * beta * nbar
    res_cond = []
    for t in ts:
        rho = displaced_thermal(np.sqrt(1 - eta) * np.sqrt(1 - beta) * t, kc, D)
        res_cond.append(abs(von_neumann_entropy(rho) - g_of(kc)))

    worst = max(max(res_bob), res_mix, max(res_cond))
    return CoherentVerification(
        eta=eta, nbar=nbar, beta=beta, D=int(D), t_samples=int(t_samples),
        seed=int(seed), threshold=threshold,
        residual_bob=tuple(res_bob), residual_charlie_mixture=res_mix,
        residual_charlie_conditional=tuple(res_cond),
        max_residual=worst, passed=bool(worst < threshold))


@dataclass(frozen=True)
class MacRegion:
    """Pentagon rate region of the two-sender coherent-state MAC."""

    eta: float
    n1: float
    n2: float
    r1_max: float
    r2_max: float
    sum_max: float

    def corners(self):
        """The two dominant corner points, user-1-favored first."""
        return [RatePoint(self.r1_max, self.sum_max - self.r1_max),
                RatePoint(self.sum_max - self.r2_max, self.r2_max)]


def mac_region_coherent(eta: float, n1: float, n2: float) -> MacRegion:
    """Coherent-state MAC pentagon: R1 <= g(ηn1), R2 <= g((1-η)n2),
    R1+R2 <= g(ηn1 + (1-η)n2)."""
    if not 0 <= eta <= 1:
        raise ValueError("transmissivity must lie in [0, 1]")
    if n1 < 0 or n2 < 0:
        raise ValueError("photon budgets must be nonnegative")
    r1 = g_of(eta * n1)
    r2 = g_of((1 - eta) * n2)
    s = g_of(eta * n1 + (1 - eta) * n2)
    return MacRegion(eta=eta, n1=n1, n2=n2, r1_max=r1, r2_max=r2, sum_max=s)


@dataclass(frozen=True, eq=False)
class MacEnvelope:
    """Pareto frontier of MAC pentagons swept over sender power allocations."""

    eta: float
    nbar: float
    constraint: str
    r1: np.ndarray
    r2: np.ndarray


def mac_envelope(eta: float, nbar: float, constraint: str = "total_transmit",
                 steps: int = DEFAULT_BETA_STEPS) -> MacEnvelope:
    """Upper envelope of coherent-state MAC regions over power allocations.

    ``total_transmit`` shares n1 + n2 = N̄, ``total_receive`` shares the
    received power ηn1 + (1-η)n2 = N̄, and ``per_user`` grants each sender N̄
    (a single pentagon). Corner points of every pentagon are collected and
    reduced to the strictly-decreasing Pareto frontier.
    """
    if constraint not in MAC_CONSTRAINTS:
        raise ValueError(f"unknown constraint {constraint!r}; "
                         f"expected one of {MAC_CONSTRAINTS}")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if nbar < 0:
        raise ValueError("photon budget must be nonnegative")

    points = []
    if constraint == "per_user":
        region = mac_region_coherent(eta, nbar, nbar)
        points.extend(region.corners())
        points.append(RatePoint(0.0, region.r2_max))
        points.append(RatePoint(region.r1_max, 0.0))
    else:
        if constraint == "total_receive" and not 0 < eta < 1:
            raise ValueError("total_receive allocation needs 0 < eta < 1")
        for s in np.linspace(0.0, 1.0, steps):
            if constraint == "total_transmit":
                n1, n2 = s * nbar, (1 - s) * nbar
            else:
                n1, n2 = s * nbar / eta, (1 - s) * nbar / (1 - eta)
            points.extend(mac_region_coherent(eta, n1, n2).corners())

    pts = sorted(points, key=lambda q: (-q[0], -q[1]))
    frontier = []
    best_r2 = -np.inf
    for q in pts:
        if q[1] > best_r2:
            frontier.append(q)
            best_r2 = q[1]
    frontier.reverse()
    arr = np.array(frontier, dtype=float)
    return MacEnvelope(eta=eta, nbar=nbar, constraint=constraint,
                       r1=arr[:, 0], r2=arr[:, 1])


def _curve_xy(curve):
    if isinstance(curve, RegionCurve):
        return np.asarray(curve.rb, dtype=float), np.asarray(curve.rc, dtype=float)
    if isinstance(curve, MacEnvelope):
        return np.asarray(curve.r1, dtype=float), np.asarray(curve.r2, dtype=float)
    x, y = curve
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def region_dominates(outer, inner, tol: float = 1e-9):
    """Whether every inner boundary point sits inside the outer region.

    The outer boundary is linearly interpolated; returns ``(True, None)`` or
    ``(False, witness)`` with the worst violating inner point.
    """
    xo, yo = _curve_xy(outer)
    xi, yi = _curve_xy(inner)
    if xo.size == 0 or xi.size == 0:
        raise ValueError("curves must be non-empty")
    order = np.argsort(xo)
    xo, yo = xo[order], yo[order]
    ceiling = np.interp(xi, xo, yo)
    over_x = xi - xo[-1]
    over_y = yi - ceiling
    bad = (over_x > tol) | (over_y > tol)
    if not np.any(bad):
        return True, None
    excess = np.where(over_x > tol, over_x, 0.0) + np.where(over_y > tol, over_y, 0.0)
    worst = int(np.argmax(excess))
    return False, RatePoint(float(xi[worst]), float(yi[worst]))


def equal_rate_crossing(curve) -> float:
    """Rate r at which the boundary crosses the equal-rate ray R_B = R_C = r."""
    x, y = _curve_xy(curve)
    order = np.argsort(x)
    x, y = x[order], y[order]
    lo, hi = float(x[0]), float(x[-1])
    f = lambda t: float(np.interp(t, x, y)) - t
    if f(lo) < 0:
        raise ValueError("curve starts below the equal-rate ray")
    if f(hi) > 0:
        raise ValueError("curve never returns to the equal-rate ray")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
