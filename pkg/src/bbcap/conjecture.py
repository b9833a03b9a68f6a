"""Verification harness for the minimum-output-entropy conjectures.

Closed-form family checks, Fock-space spot checks, a seeded simulated-
annealing counterexample search over constrained input states, the Gaussian
two-mode check, and the Monte-Carlo test of the power-split inequality used
by the converse argument.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from . import fock, gaussian
from .errors import TruncationError
from .scalar import (g_inverse, g_of, make_distribution, match_entropy,
                     shannon_entropy, thin, thinning_matrix)

CLOSED_FORM_TOL = 1e-9
SIMULATION_TOL = 1e-6

_LN2 = np.log(2.0)


def _vacuum_vector(D: int) -> fock.FockVector:
    amps = np.zeros(D + 1, dtype=complex)
    amps[0] = 1.0
    return fock.FockVector(amps)


@dataclass
class ConjectureReport:
    """Outcome of one minimum-output-entropy check."""

    which: str
    family: str
    eta: float
    K: float
    cutoff: Optional[int]
    input_entropy: float
    output_entropy: float
    bound: float
    margin: float
    passed: bool
    entropy_kind: str
    tolerance: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def conv(v):
            if isinstance(v, (np.floating, float)):
                return float(v)
            if isinstance(v, (np.integer, int)):
                return int(v)
            if isinstance(v, (list, tuple, np.ndarray)):
                return [conv(x) for x in v]
            if isinstance(v, dict):
                return {k: conv(x) for k, x in v.items()}
            return v

        return {
            "which": self.which,
            "family": self.family,
            "eta": float(self.eta),
            "K": float(self.K),
            "cutoff": None if self.cutoff is None else int(self.cutoff),
            "input_entropy": float(self.input_entropy),
            "output_entropy": float(self.output_entropy),
            "bound": float(self.bound),
            "margin": float(self.margin),
            "passed": bool(self.passed),
            "entropy_kind": self.entropy_kind,
            "tolerance": float(self.tolerance),
            "extra": conv(self.extra),
        }


def check_conj2_family(family: str, eta: float, K: float, D: int, *, M=None,
                       tol: float = CLOSED_FORM_TOL, cross_check=None) -> ConjectureReport:
    """Check the diagonal-input conjecture for one distribution family.

    The family parameter is matched so the input entropy equals g(K); the
    output is the binomially thinned law with survival probability 1-η and
    its entropy must stay at or above g((1-η)K). For cutoffs D <= 30 (or when
    ``cross_check`` is forced) the thinning result is also compared against
    the full Fock-space simulation with vacuum on the idle port.
    """
    if not 0 < eta < 1:
        raise ValueError("transmissivity must lie in (0, 1)")
    if K <= 0:
        raise ValueError("K must be positive")
    param = match_entropy(family, g_of(K), D, M=M)
    kwargs = {"poisson": {"lam": param}, "binomial": {"M": M, "p": param},
              "bose_einstein": {"K": param}}[family]
    pv = make_distribution(family, D, **kwargs)
    out = thin(pv, 1.0 - eta)
    s_in = shannon_entropy(pv)
    s_out = shannon_entropy(out)
    bound = g_of((1 - eta) * K)
    extra = {"param": param}
    if M is not None:
        extra["M"] = int(M)
    if cross_check or (cross_check is None and D <= 30):
        rho_b = fock.DensityMatrix(np.diag(pv.probs.astype(complex)))
        s_fock = fock.von_neumann_entropy(
            fock.conj_output_state(_vacuum_vector(D), rho_b, eta, D))
        extra["fock_residual"] = abs(s_fock - s_out)
    margin = s_out - bound
    return ConjectureReport(
        which="conj2", family=family, eta=eta, K=K, cutoff=int(D),
        input_entropy=s_in, output_entropy=s_out, bound=bound, margin=margin,
        passed=bool(margin >= -tol), entropy_kind="von_neumann", tolerance=tol,
        extra=extra)


def _entropy_functional(kind: str, rho: fock.DensityMatrix) -> float:
    if kind == "von_neumann":
        return fock.von_neumann_entropy(rho)
    if kind == "wehrl":
        return fock.wehrl_entropy_numeric(rho).nats
    if kind.startswith("renyi-"):
        return fock.renyi_entropy(rho, int(kind.split("-", 1)[1]))
    raise ValueError(f"unknown entropy kind {kind!r}")


def check_conj1_state(psi_a: fock.FockVector, eta: float, K: float, D: int,
                      entropy_kind: str = "von_neumann",
                      tol: float = SIMULATION_TOL) -> ConjectureReport:
    """Compare one pure input against the conjectured vacuum optimum.

    The partner port carries a thermal state of mean K. For von Neumann
    entropy the reference is the closed form g((1-η)K); for Rényi and Wehrl
    variants the reference is the same functional evaluated on the simulated
    vacuum-input output, since no closed form is claimed for those minima.
    """
    if not 0 < eta < 1:
        raise ValueError("transmissivity must lie in (0, 1)")
    rho_b = fock.thermal_density(K, D)
    out = fock.conj_output_state(psi_a, rho_b, eta, D)
    s_out = _entropy_functional(entropy_kind, out)
    if entropy_kind == "von_neumann":
        bound = g_of((1 - eta) * K)
    else:
        ref = fock.conj_output_state(_vacuum_vector(D), rho_b, eta, D)
        bound = _entropy_functional(entropy_kind, ref)
    margin = s_out - bound
    return ConjectureReport(
        which="conj1", family="pure-state", eta=eta, K=K, cutoff=int(D),
        input_entropy=fock.von_neumann_entropy(rho_b), output_entropy=s_out,
        bound=bound, margin=margin, passed=bool(margin >= -tol),
        entropy_kind=entropy_kind, tolerance=tol,
        extra={"vacuum_fidelity": float(np.abs(psi_a.amps[0]) ** 2)})


def check_strong2_gaussian(eta: float, K: float, r_grid=None,
                           tol: float = CLOSED_FORM_TOL) -> ConjectureReport:
    """Two-mode Gaussian check: squeezed joint inputs never beat the product
    thermal state, whose joint output entropy is 2 g((1-η)K)."""
    if r_grid is None:
        r_grid = np.linspace(-1.0, 1.0, 41)
    table = gaussian.strong_conj2_gaussian_check(eta, K, r_grid)
    idx = int(np.argmin(table[:, 1]))
    s_min = float(table[idx, 1])
    bound = 2.0 * g_of((1 - eta) * K)
    margin = s_min - bound
    return ConjectureReport(
        which="strong2_gaussian", family="two-mode-squeezed-thermal", eta=eta,
        K=K, cutoff=None, input_entropy=2.0 * g_of(K), output_entropy=s_min,
        bound=bound, margin=margin, passed=bool(margin >= -tol),
        entropy_kind="von_neumann", tolerance=tol,
        extra={"argmin_r": float(table[idx, 0]),
               "r_min": float(np.min(table[:, 0])),
               "r_max": float(np.max(table[:, 0])),
               "grid_points": int(table.shape[0])})


@dataclass(frozen=True)
class AnnealConfig:
    """Budget and proposal parameters for the annealing searches."""

    seed: int = 0
    initial_temperature: float = 0.1
    cooling_ratio: float = 0.97
    steps: int = 2000
    restarts: int = 8
    proposal_scale: float = 0.05
    D: int = 40
    entropy_constraint_tol: float = 1e-9
    track_history: bool = False

    def __post_init__(self):
        if self.steps < 1 or self.restarts < 1:
            raise ValueError("steps and restarts must be >= 1")
        if not 0 < self.cooling_ratio < 1:
            raise ValueError("cooling_ratio must lie in (0, 1)")
        if self.proposal_scale <= 0:
            raise ValueError("proposal_scale must be positive")

    def to_dict(self) -> dict:
        return {
            "seed": int(self.seed),
            "initial_temperature": float(self.initial_temperature),
            "cooling_ratio": float(self.cooling_ratio),
            "steps": int(self.steps),
            "restarts": int(self.restarts),
            "proposal_scale": float(self.proposal_scale),
            "D": int(self.D),
            "entropy_constraint_tol": float(self.entropy_constraint_tol),
        }


@dataclass
class AnnealResult:
    report: ConjectureReport
    best_state: np.ndarray
    history: Optional[list] = None


def _run_chain(rng, objective, init_state, perturb, config):
    """Metropolis chain with geometric cooling.

    The proposal step length shrinks geometrically from full size to 5% of it
    across the step budget, the usual continuous-annealing move schedule; a
    fixed step would leave the walk stranded a step-radius away from the
    optimum, which in this dimension means a visible entropy excess. Proposals
    the objective rejects outright (guard or projection failures) count
    separately.
    """
    state = init_state
    val = objective(state)
    if val is None:
        raise RuntimeError("initial state rejected by the objective")
    best_state, best_val = state, val
    accepted = 0
    invalid = 0
    history = [] if config.track_history else None
    temp = config.initial_temperature
    for step in range(config.steps):
        shrink = 0.05 ** (step / config.steps)
        cand = perturb(rng, state, shrink)
        cval = objective(cand)
        if cval is None:
            invalid += 1
        else:
            delta = cval - val
            if delta <= 0 or rng.random() < np.exp(-delta / max(temp, 1e-300)):
                state, val = cand, cval
                accepted += 1
                if val < best_val:
                    best_val, best_state = val, state
        if history is not None:
            history.append(best_val)
        temp *= config.cooling_ratio
    return best_state, best_val, accepted, invalid, history


def _displaced_vacuum_overlap(psi: np.ndarray) -> tuple:
    """(|<a>|, fidelity of the zero-mean representative with vacuum).

    The output entropy is exactly displacement-invariant, so the search can
    settle anywhere on the coherent orbit of its minimizer; undoing the mean
    field exposes how close the found state is to that orbit's vacuum member.
    """
    from scipy.linalg import expm

    d = psi.size
    ns = np.arange(1, d)
    alpha = complex(np.sum(np.sqrt(ns) * np.conj(psi[:-1]) * psi[1:]))
    if alpha == 0:
        return 0.0, float(np.abs(psi[0]) ** 2)
    a = fock.annihilation(d - 1)
    disp = expm(-alpha * a.conj().T + np.conj(alpha) * a)
    centered = disp @ psi
    return float(np.abs(alpha)), float(np.abs(centered[0]) ** 2)


def anneal_conj1(eta: float, K: float, config: AnnealConfig | None = None) -> AnnealResult:
    """Search pure partner-port inputs for output entropy below g((1-η)K).

    Proposals add complex Gaussian noise to the amplitudes and renormalize;
    acceptance is Metropolis with geometric cooling, and each restart runs an
    independent, seeded chain so results are reproducible bit-for-bit.
    Proposals whose mean photon number would overrun the truncation guard are
    rejected and counted.
    """
    if not 0 < eta < 1:
        raise ValueError("transmissivity must lie in (0, 1)")
    config = config or AnnealConfig()
    D = config.D
    pv = make_distribution("bose_einstein", D, K=K)
    p_diag = pv.probs
    mean_b = pv.mean()
    mean_cap = D / 3.0 - mean_b
    ns = np.arange(D + 1)

    # Transit states may park a little mass near the cutoff; renormalizing
    # leakage up to 1e-3 keeps the walk alive without distorting the scores
    # that matter, since states near the bound are low-photon and leak ~0.
    def objective(psi):
        if float(ns @ np.abs(psi) ** 2) > mean_cap:
            return None
        rho = fock._pure_diag_output(psi, p_diag, eta, D)
        tr = float(np.real(np.trace(rho)))
        if tr < 1.0 - 1e-3:
            return None
        evs = np.linalg.eigvalsh(rho / tr)
        evs = evs[evs > 0]
        return float(-(evs @ np.log2(evs)))

    envelope = np.exp(-ns / 4.0)

    def draw_state(rng):
        for _ in range(100):
            raw = (rng.standard_normal(D + 1) + 1j * rng.standard_normal(D + 1))
            raw = raw * envelope
            psi = raw / np.linalg.norm(raw)
            if objective(psi) is not None:
                return psi
        raise RuntimeError("could not draw an initial state inside the guard")

    def perturb(rng, psi, shrink):
        step = rng.standard_normal(D + 1) + 1j * rng.standard_normal(D + 1)
        cand = psi + shrink * config.proposal_scale * step / np.linalg.norm(step)
        return cand / np.linalg.norm(cand)

    best_val = np.inf
    best_state = None
    restart_bests = []
    accepted_total = 0
    invalid_total = 0
    history = None
    for r in range(config.restarts):
        rng = np.random.default_rng([config.seed, r])
        init = draw_state(rng)
        state, val, acc, inv, hist = _run_chain(rng, objective, init, perturb, config)
        restart_bests.append(val)
        accepted_total += acc
        invalid_total += inv
        if val < best_val:
            best_val, best_state = val, state
            history = hist

    bound = g_of((1 - eta) * K)
    mean_field, centered_fid = _displaced_vacuum_overlap(best_state)
    report = ConjectureReport(
        which="conj1", family="annealed-pure", eta=eta, K=K, cutoff=int(D),
        input_entropy=shannon_entropy(pv), output_entropy=best_val, bound=bound,
        margin=best_val - bound, passed=bool(best_val - bound >= -SIMULATION_TOL),
        entropy_kind="von_neumann", tolerance=SIMULATION_TOL,
        extra={
            "config": config.to_dict(),
            "restart_bests": restart_bests,
            "accepted": accepted_total,
            "guard_rejected": invalid_total,
            "vacuum_fidelity": float(np.abs(best_state[0]) ** 2),
            "mean_field_abs": mean_field,
            "centered_vacuum_fidelity": centered_fid,
        })
    return AnnealResult(report=report, best_state=best_state, history=history)


def _tilt_to_entropy(logq: np.ndarray, target: float, tol: float,
                     max_iter: int = 200):
    """Project onto the fixed-entropy shell with the power map p -> p^s / Z."""

    def tilted(s):
        w = s * logq
        w = w - logsumexp(w)
        p = np.exp(w)
        return float(-(p @ w) / _LN2), p

    h1, p1 = tilted(1.0)
    if abs(h1 - target) <= tol:
        return p1
    if h1 > target:
        lo, hi = 1.0, 2.0
        while True:
            h, _ = tilted(hi)
            if h <= target:
                break
            hi *= 2.0
            if hi > 1e8:
                return None
    else:
        lo, hi = 0.5, 1.0
        while True:
            h, _ = tilted(lo)
            if h >= target:
                break
            lo *= 0.5
            if lo < 1e-8:
                return None
    # entropy decreases as s grows, so the target stays between tilted(lo) and tilted(hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        h, p = tilted(mid)
        if abs(h - target) <= tol:
            return p
        if h > target:
            lo = mid
        else:
            hi = mid
    return None


def anneal_conj2_diagonal(eta: float, K: float, config: AnnealConfig | None = None,
                          initial=None) -> AnnealResult:
    """Search Fock-diagonal inputs of entropy g(K) for thinned entropy below
    g((1-η)K).

    Proposals multiply the probabilities by exponentiated Gaussian noise and
    are projected back onto the entropy shell by a power tilt solved with
    bisection; proposals whose projection fails are rejected and counted.
    """
    if not 0 < eta < 1:
        raise ValueError("transmissivity must lie in (0, 1)")
    config = config or AnnealConfig()
    D = config.D
    target = g_of(K)
    tilt_tol = config.entropy_constraint_tol / 2.0
    tmat = thinning_matrix(1.0 - eta, D)

    def objective(p):
        if p is None:
            return None
        q = tmat @ p
        nz = q[q > 0]
        return float(-(nz @ np.log2(nz)))

    def project(q):
        return _tilt_to_entropy(np.log(np.clip(q, 1e-300, None)), target, tilt_tol)

    def draw_state(rng):
        for _ in range(100):
            p = project(rng.exponential(1.0, D + 1))
            if p is not None:
                return p
        raise RuntimeError("could not draw an initial state on the entropy shell")

    def perturb(rng, p, shrink):
        noise = np.exp(shrink * config.proposal_scale * rng.standard_normal(D + 1))
        return project(p * noise)

    if initial is not None:
        init_fixed = project(np.asarray(getattr(initial, "probs", initial), dtype=float))
        if init_fixed is None:
            raise ValueError("initial distribution cannot be projected onto the shell")
    else:
        init_fixed = None

    best_val = np.inf
    best_state = None
    restart_bests = []
    accepted_total = 0
    invalid_total = 0
    history = None
    for r in range(config.restarts):
        rng = np.random.default_rng([config.seed, r])
        init = init_fixed if init_fixed is not None else draw_state(rng)
        state, val, acc, inv, hist = _run_chain(rng, objective, init, perturb, config)
        restart_bests.append(val)
        accepted_total += acc
        invalid_total += inv
        if val < best_val:
            best_val, best_state = val, state
            history = hist

    bound = g_of((1 - eta) * K)
    nz = best_state[best_state > 0]
    report = ConjectureReport(
        which="conj2", family="annealed-diagonal", eta=eta, K=K, cutoff=int(D),
        input_entropy=float(-(nz @ np.log2(nz))), output_entropy=best_val,
        bound=bound, margin=best_val - bound,
        passed=bool(best_val - bound >= -SIMULATION_TOL),
        entropy_kind="von_neumann", tolerance=SIMULATION_TOL,
        extra={
            "config": config.to_dict(),
            "restart_bests": restart_bests,
            "accepted": accepted_total,
            "projection_failures": invalid_total,
            "entropy_target": target,
        })
    return AnnealResult(report=report, best_state=best_state, history=history)


@dataclass(frozen=True, eq=False)
class LemmaInstance:
    """One synthetic codebook summary for the power-split inequality.

    ``betas`` and ``nbars`` are the per-index splits and photon budgets; the
    implicit weights are uniform and the weighted mean budget must equal
    ``nbar``.
    """

    eta: float
    betas: np.ndarray
    nbars: np.ndarray
    nbar: float

    def __post_init__(self):
        betas = np.asarray(self.betas, dtype=float)
        nbars = np.asarray(self.nbars, dtype=float)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "nbars", nbars)
        if not 0.5 < self.eta <= 1:
            raise ValueError("lemma instances need eta > 1/2")
        if betas.shape != nbars.shape or betas.ndim != 1 or betas.size == 0:
            raise ValueError("betas and nbars must be matching 1-D arrays")
        if np.any(betas < 0) or np.any(betas > 1):
            raise ValueError("betas must lie in [0, 1]")
        if np.any(nbars < 0):
            raise ValueError("nbars must be nonnegative")
        if abs(float(nbars.mean()) - self.nbar) > 1e-12 * max(1.0, self.nbar):
            raise ValueError("uniform-weight mean of nbars must equal nbar")


@dataclass(frozen=True)
class LemmaOutcome:
    beta: float
    lhs: float
    rhs: float
    holds: bool
    feasible: bool


def verify_converse_lemma(inst: LemmaInstance) -> LemmaOutcome:
    """Evaluate the averaged power-split inequality for one instance.

    The effective split β solves g(ηβN̄) = mean_k g(ηβ_k N̄_k); the inequality
    holds when mean_k g((1-η)β_k N̄_k) >= g((1-η)βN̄) - 1e-12. Instances whose
    root lands outside [0, 1] are flagged infeasible rather than treated as
    violations (the averaging that produces them cannot arise from a valid
    codebook; with the mean-budget constraint enforced the root stays inside
    by concavity).
    """
    if inst.nbar == 0:
        return LemmaOutcome(beta=0.0, lhs=0.0, rhs=0.0, holds=True, feasible=True)
    target = float(np.mean(g_of(inst.eta * inst.betas * inst.nbars)))
    beta = g_inverse(target) / (inst.eta * inst.nbar)
    feasible = beta <= 1.0 + 1e-9
    lhs = float(np.mean(g_of((1 - inst.eta) * inst.betas * inst.nbars)))
    rhs = float(g_of((1 - inst.eta) * beta * inst.nbar))
    return LemmaOutcome(beta=float(beta), lhs=lhs, rhs=rhs,
                        holds=bool(lhs >= rhs - 1e-12), feasible=bool(feasible))


def random_lemma_instance(rng, eta: float, nbar: float,
                          m_low: int = 2, m_high: int = 8) -> LemmaInstance:
    """Draw a feasible instance: splits uniform in [0,1], budgets exponential
    rescaled so their uniform-weight mean is exactly nbar."""
    m = int(rng.integers(m_low, m_high + 1))
    betas = rng.uniform(0.0, 1.0, m)
    raw = rng.exponential(1.0, m)
    nbars = raw * (nbar / raw.mean())
    nbars = nbars * (nbar / nbars.mean())
    return LemmaInstance(eta=eta, betas=betas, nbars=nbars, nbar=nbar)


@dataclass
class LemmaSuiteResult:
    eta: float
    nbar: float
    instances: int
    seed: int
    holds_count: int
    infeasible_count: int
    failures: list

    def to_dict(self) -> dict:
        return {
            "eta": float(self.eta),
            "nbar": float(self.nbar),
            "instances": int(self.instances),
            "seed": int(self.seed),
            "holds_count": int(self.holds_count),
            "infeasible_count": int(self.infeasible_count),
            "failures": self.failures,
        }


def run_lemma_suite(eta: float, nbar: float, instances: int, seed: int = 0) -> LemmaSuiteResult:
    """Monte-Carlo sweep of :func:`verify_converse_lemma`.

    Any violating instance is captured with its full data so it can be
    reproduced from the seed; such a find would falsify the omitted proof the
    inequality stands in for, so it must never be discarded.
    """
    rng = np.random.default_rng(seed)
    holds = 0
    infeasible = 0
    failures = []
    for _ in range(int(instances)):
        inst = random_lemma_instance(rng, eta, nbar)
        out = verify_converse_lemma(inst)
        if not out.feasible:
            infeasible += 1
        if out.holds:
            holds += 1
        else:
            failures.append({
                "eta": float(eta),
                "betas": [float(b) for b in inst.betas],
                "nbars": [float(n) for n in inst.nbars],
                "nbar": float(nbar),
                "beta": out.beta,
                "lhs": out.lhs,
                "rhs": out.rhs,
            })
    return LemmaSuiteResult(eta=eta, nbar=nbar, instances=int(instances),
                            seed=int(seed), holds_count=holds,
                            infeasible_count=infeasible, failures=failures)
