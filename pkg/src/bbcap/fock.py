"""Truncated Fock-space simulator.

State constructors, the photon-number-conserving beam-splitter unitary,
partial traces, and entropy functionals (von Neumann, Rényi, Wehrl). The
splitter convention is c = √η a + √(1-η) b for the transmitted output and
d = √(1-η) a - √η b for the reflected one; the transmitted mode is always
the *first* slot of a two-mode array.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import CoverageError, PhysicalityError, TruncationError
from .scalar import make_distribution

_HERM_TOL = 1e-12
_TRACE_TOL = 1e-10
_EIG_FLOOR = -1e-10
_W_PATH_MAX_D = 80


class FockVector:
    """Pure-state amplitudes over photon numbers 0..D.

    Normalized on construction; ``deficit`` records the squared norm the
    generating constructor lost to truncation.
    """

    __slots__ = ("amps", "deficit")

    def __init__(self, amps, deficit: float = 0.0):
        arr = np.asarray(amps, dtype=complex).copy()
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("amps must be a non-empty 1-D sequence")
        norm = float(np.linalg.norm(arr))
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("amps must have a finite nonzero norm")
        self.amps = arr / norm
        self.deficit = float(deficit)

    @property
    def cutoff(self) -> int:
        return self.amps.size - 1

    def __len__(self) -> int:
        return self.amps.size

    def mean_photon(self) -> float:
        return float(np.arange(self.amps.size) @ np.abs(self.amps) ** 2)

    def fidelity(self, other: "FockVector") -> float:
        """Squared overlap |<self|other>|²."""
        n = min(self.amps.size, other.amps.size)
        return float(np.abs(np.vdot(self.amps[:n], other.amps[:n])) ** 2)


class DensityMatrix:
    """Hermitian unit-trace matrix on a truncated Fock space.

    ``dims`` lists the per-mode dimensions (one entry for single-mode states,
    two for two-mode states at doubled index). Hermiticity and trace are
    validated on construction; positivity is checked wherever a spectrum is
    actually computed.
    """

    __slots__ = ("mat", "dims")

    def __init__(self, mat, dims=None):
        m = np.asarray(mat, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if dims is None:
            dims = (m.shape[0],)
        dims = tuple(int(d) for d in dims)
        if int(np.prod(dims)) != m.shape[0]:
            raise ValueError(f"dims {dims} inconsistent with matrix size {m.shape[0]}")
        if float(np.max(np.abs(m - m.conj().T))) > _HERM_TOL:
            raise ValueError("density matrix is not Hermitian within 1e-12")
        tr = float(np.real(np.trace(m)))
        if abs(tr - 1.0) > _TRACE_TOL:
            raise ValueError(f"density matrix trace {tr!r} differs from 1 beyond 1e-10")
        self.mat = 0.5 * (m + m.conj().T)
        self.dims = dims

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    def mean_photon(self) -> float:
        """Total mean photon number, summed over modes."""
        diag = np.real(np.diagonal(self.mat)).reshape(self.dims)
        total = 0.0
        for axis, d in enumerate(self.dims):
            shape = [1] * len(self.dims)
            shape[axis] = d
            total += float(np.sum(diag * np.arange(d).reshape(shape)))
        return total

    def is_diagonal(self, tol: float = 1e-14) -> bool:
        off = self.mat - np.diag(np.diagonal(self.mat))
        return float(np.max(np.abs(off))) <= tol


@dataclass(frozen=True)
class BeamSplitterBlocks:
    """Beam-splitter unitary, stored one total-photon-number block at a time.

    ``blocks[N][j, i]`` is the amplitude for ``N-j`` photons in the
    transmitted output and ``j`` in the reflected output given ``N-i`` photons
    entered the transmitted port and ``i`` the other; every block is real
    orthogonal, which is exactly photon-number conservation.
    """

    eta: float
    blocks: tuple

    @property
    def nmax(self) -> int:
        return len(self.blocks) - 1


@lru_cache(maxsize=8)
def _bs_blocks_cached(eta: float, nmax: int) -> BeamSplitterBlocks:
    theta = np.arctan2(np.sqrt(1.0 - eta), np.sqrt(eta))
    blocks = []
    for N in range(nmax + 1):
        j = np.arange(N)
        coup = np.sqrt((j + 1) * (N - j))
        gen = np.zeros((N + 1, N + 1))
        gen[j, j + 1] = coup
        gen[j + 1, j] = -coup
        R = expm(theta * gen)
        parity = np.where(np.arange(N + 1) % 2 == 0, 1.0, -1.0)
        B = parity[:, None] * R
        B.flags.writeable = False
        blocks.append(B)
    return BeamSplitterBlocks(eta, tuple(blocks))


def bs_blocks(eta: float, nmax: int) -> BeamSplitterBlocks:
    """Blocks of the beam-splitter unitary for total photon numbers 0..nmax.

    Each block is the exponential of the block-restricted single-photon
    mixing generator (times a parity sign on the reflected output), so it is
    the N=1 rotation propagated through repeated single-photon action yet
    stays orthogonal to machine precision at any N; closed-form factorial
    sums and naive per-photon recursions both disintegrate beyond N of order
    60. Results are memoized by (eta, nmax) and safe for concurrent reads.
    """
    if not 0 <= eta <= 1:
        raise ValueError("transmissivity must lie in [0, 1]")
    if nmax < 0:
        raise ValueError("nmax must be >= 0")
    return _bs_blocks_cached(float(eta), int(nmax))


def annihilation(D: int) -> np.ndarray:
    a = np.zeros((D + 1, D + 1))
    ns = np.arange(1, D + 1)
    a[ns - 1, ns] = np.sqrt(ns)
    return a


def coherent_state(alpha: complex, D: int) -> FockVector:
    """Coherent state |alpha> truncated at photon number D."""
    alpha = complex(alpha)
    D = int(D)
    n_mean = abs(alpha) ** 2
    if n_mean > D / 4:
        raise TruncationError(
            f"coherent |alpha|^2={n_mean:.4g} exceeds the D/4 tail guard; "
            f"need D >= {int(np.ceil(4 * n_mean))}")
    if D == 0 or alpha == 0:
        amps = np.zeros(D + 1, dtype=complex)
        amps[0] = 1.0
        return FockVector(amps, deficit=0.0 if alpha == 0 else 1.0 - np.exp(-n_mean))
    factors = alpha / np.sqrt(np.arange(1, D + 1))
    amps = np.concatenate(([1.0 + 0j], np.cumprod(factors))) * np.exp(-0.5 * n_mean)
    deficit = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    return FockVector(amps, deficit=deficit)


def thermal_density(K: float, D: int, tail_tol: float = 1e-10) -> DensityMatrix:
    """Thermal (Bose-Einstein) state of mean photon number K, truncated at D."""
    pv = make_distribution("bose_einstein", D, K=K, tail_tol=tail_tol)
    return DensityMatrix(np.diag(pv.probs.astype(complex)), dims=(D + 1,))


def displaced_thermal(d: complex, K: float, D: int) -> DensityMatrix:
    """Thermal state of mean K displaced by amplitude d.

    Mean photon number |d|² + K; entropy g(K), untouched by the displacement.
    The displacement operator is the exact exponential of the truncated
    generator, so the output stays unit-trace.
    """
    d = complex(d)
    load = abs(d) ** 2 + K
    if load > int(D) / 4:
        raise TruncationError(
            f"displaced thermal load |d|^2+K={load:.4g} exceeds the D/4 tail guard; "
            f"need D >= {int(np.ceil(4 * load))}")
    th = thermal_density(K, D)
    if d == 0:
        return th
    a = annihilation(D)
    gen = d * a.conj().T - np.conj(d) * a
    U = expm(gen)
    out = U @ th.mat @ U.conj().T
    return DensityMatrix(0.5 * (out + out.conj().T), dims=(D + 1,))


def tensor_product(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(np.kron(a.mat, b.mat), dims=a.dims + b.dims)


def _block_ranges(N: int, d: int):
    # second-slot indices present in an arena truncated at d-1 photons per mode
    return np.arange(max(0, N - (d - 1)), min(N, d - 1) + 1)


def apply_bs_pure(a: FockVector, b: FockVector, eta: float) -> np.ndarray:
    """Send the pure product state a ⊗ b through the splitter.

    Returns the two-mode output amplitudes on a square (d, d) arena,
    d = max(len(a), len(b)), indexed (transmitted, reflected). Mass carried
    by total photon numbers above d-1 is partially truncated, exactly as the
    arena itself truncates.
    """
    d = max(len(a), len(b))
    pa = np.zeros(d, dtype=complex)
    pa[: len(a)] = a.amps
    pb = np.zeros(d, dtype=complex)
    pb[: len(b)] = b.amps
    return _apply_bs_pure_arrays(pa, pb, bs_blocks(eta, 2 * (d - 1)))


def _apply_bs_pure_arrays(pa, pb, bsb: BeamSplitterBlocks) -> np.ndarray:
    d = pa.size
    out = np.zeros((d, d), dtype=complex)
    for N in range(0, 2 * (d - 1) + 1):
        rng = _block_ranges(N, d)
        v = pa[N - rng] * pb[rng]
        sub = bsb.blocks[N][np.ix_(rng, rng)]
        out[N - rng, rng] = sub @ v
    return out


def apply_bs_density(rho2: DensityMatrix, bsb: BeamSplitterBlocks) -> DensityMatrix:
    """Conjugate a two-mode density matrix by the beam-splitter unitary.

    The state must keep its mass away from the truncated corner (total photon
    number above the per-mode cutoff), otherwise the restricted blocks leak
    trace and construction fails.
    """
    if rho2.n_modes != 2 or rho2.dims[0] != rho2.dims[1]:
        raise ValueError("apply_bs_density expects a two-mode state with equal cutoffs")
    d = rho2.dims[0]
    if bsb.nmax < 2 * (d - 1):
        raise ValueError(f"blocks go to N={bsb.nmax}, need N={2 * (d - 1)}")
    idx = []
    sub = []
    for N in range(0, 2 * (d - 1) + 1):
        rng = _block_ranges(N, d)
        idx.append((N - rng) * d + rng)
        sub.append(bsb.blocks[N][np.ix_(rng, rng)])
    out = np.zeros_like(rho2.mat)
    for idx_i, R_i in zip(idx, sub):
        for idx_j, R_j in zip(idx, sub):
            blockmat = rho2.mat[np.ix_(idx_i, idx_j)]
            out[np.ix_(idx_i, idx_j)] = R_i @ blockmat @ R_j.T
    return DensityMatrix(out, dims=rho2.dims)


def reduce_mode(rho2: DensityMatrix, keep: str) -> DensityMatrix:
    """Partial trace of a two-mode state down to the kept mode."""
    if rho2.n_modes != 2:
        raise ValueError("reduce_mode expects a two-mode state")
    d1, d2 = rho2.dims
    four = rho2.mat.reshape(d1, d2, d1, d2)
    if keep == "first":
        red = np.einsum("ikjk->ij", four)
        dim = d1
    elif keep == "second":
        red = np.einsum("kikj->ij", four)
        dim = d2
    else:
        raise ValueError("keep must be 'first' or 'second'")
    return DensityMatrix(red, dims=(dim,))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy in bits; eigenvalues in [-1e-10, 0] clamp to zero."""
    evs = np.linalg.eigvalsh(rho.mat)
    if evs.min() < _EIG_FLOOR:
        raise PhysicalityError(
            f"density matrix eigenvalue {evs.min():.3e} below the -1e-10 floor")
    evs = evs[evs > 0]
    return float(-(evs @ np.log2(evs)))


def renyi_entropy(rho: DensityMatrix, order: int) -> float:
    """Rényi entropy of integer order >= 2, in bits."""
    if order != int(order) or int(order) < 2:
        raise ValueError("Rényi order must be an integer >= 2")
    order = int(order)
    evs = np.linalg.eigvalsh(rho.mat)
    if evs.min() < _EIG_FLOOR:
        raise PhysicalityError(
            f"density matrix eigenvalue {evs.min():.3e} below the -1e-10 floor")
    evs = np.clip(evs, 0.0, None)
    return float(np.log2(np.sum(evs ** order)) / (1 - order))


@dataclass(frozen=True)
class GridSpec:
    """Square phase-space grid over Re α, Im α in [-radius, radius]."""
    radius: float
    spacing: float = 0.05


@dataclass(frozen=True)
class WehrlEstimate:
    nats: float
    coverage: float
    error_estimate: float
    radius: float
    spacing: float


def wehrl_entropy_numeric(rho: DensityMatrix, grid: GridSpec | None = None) -> WehrlEstimate:
    """Wehrl entropy -∬ Q ln Q d²α by trapezoidal quadrature, in nats.

    Q(α) = <α|ρ|α>/π. The default grid radius is 3·(1+√<n̂>); the error
    estimate compares against the same quadrature at doubled spacing. Raises
    :class:`CoverageError` when the grid captures less than 1 - 1e-4 of the
    state's mass.
    """
    if rho.n_modes != 1:
        raise ValueError("wehrl_entropy_numeric expects a single-mode state")
    if grid is None:
        # 3(1+sqrt(n)) is the bare-minimum radius; pad it so the integrand's
        # tail (which decays one power slower than Q itself) stays below 1e-6
        radius0 = 3.0 * (1.0 + np.sqrt(max(rho.mean_photon(), 0.0))) + 1.5
        spacing = 0.05
        radius = spacing * np.ceil(radius0 / spacing)
        grid = GridSpec(radius=float(radius), spacing=spacing)
    if grid.spacing > 0.1:
        raise ValueError("grid spacing must be <= 0.1")
    h = float(grid.spacing)
    half = int(round(grid.radius / h))
    count = 2 * half + 1
    ax = (np.arange(count) - half) * h
    x, y = np.meshgrid(ax, ax, indexing="ij")
    alpha = (x + 1j * y).ravel()

    d = rho.dim
    if d > 1:
        factors = alpha[:, None] / np.sqrt(np.arange(1, d))[None, :]
        pows = np.concatenate([np.ones((alpha.size, 1), dtype=complex),
                               np.cumprod(factors, axis=1)], axis=1)
    else:
        pows = np.ones((alpha.size, 1), dtype=complex)
    C = pows * np.exp(-0.5 * np.abs(alpha) ** 2)[:, None]
    Q = np.real(np.sum((C.conj() @ rho.mat) * C, axis=1)) / np.pi
    Q = np.clip(Q, 0.0, None)

    wx = np.full(count, h)
    wx[0] = wx[-1] = h / 2
    w = np.outer(wx, wx).ravel()

    coverage = float(w @ Q)
    if coverage < 1.0 - 1e-4:
        raise CoverageError(
            f"phase-space grid captured only {coverage:.6f} of the state; "
            "increase the radius")
    nz = Q > 0
    S = float(-(w[nz] * Q[nz]) @ np.log(Q[nz]))

    # same integrand on the half-resolution subgrid for an error estimate
    keep = np.zeros(count, dtype=bool)
    keep[::2] = True
    mask2 = np.outer(keep, keep).ravel()
    count2 = half + 1
    wx2 = np.full(count2, 2 * h)
    wx2[0] = wx2[-1] = h
    w2 = np.outer(wx2, wx2).ravel()
    Q2 = Q[mask2]
    nz2 = Q2 > 0
    S2 = float(-(w2[nz2] * Q2[nz2]) @ np.log(Q2[nz2]))

    return WehrlEstimate(nats=S, coverage=coverage, error_estimate=abs(S - S2),
                         radius=grid.radius, spacing=h)


@lru_cache(maxsize=4)
def _w_tensor_cached(eta: float, D: int):
    bsb = bs_blocks(eta, 2 * D)
    size = D + 1
    W = np.zeros((size, size, size))
    # sentinel index 'size' reads a padded zero amplitude
    IDX = np.full((size, size, size), size, dtype=np.intp)
    for N in range(2 * D + 1):
        rng = _block_ranges(N, size)
        nn, ll = np.meshgrid(rng, rng, indexing="ij")
        W[nn, N - ll, ll] = bsb.blocks[N][ll, nn]
        IDX[nn, N - ll, ll] = N - nn
    W.flags.writeable = False
    IDX.flags.writeable = False
    return W, IDX


def _pure_diag_output(psi: np.ndarray, p_diag: np.ndarray, eta: float, D: int) -> np.ndarray:
    """Unnormalized transmitted-mode state for pure a-input and diagonal b-input."""
    if D <= _W_PATH_MAX_D:
        W, IDX = _w_tensor_cached(float(eta), int(D))
        psi_ext = np.append(psi, 0.0)
        A = psi_ext[IDX] * W
        tmp = A * p_diag[:, None, None]
        return np.matmul(tmp, A.conj().transpose(0, 2, 1)).sum(axis=0)
    bsb = bs_blocks(eta, 2 * D)
    rho = np.zeros((D + 1, D + 1), dtype=complex)
    for n in np.nonzero(p_diag > 1e-16)[0]:
        psi2 = np.zeros((D + 1, D + 1), dtype=complex)
        for N in range(n, n + D + 1):
            ls = _block_ranges(N, D + 1)
            psi2[N - ls, ls] = psi[N - n] * bsb.blocks[N][ls, n]
        rho += p_diag[n] * (psi2 @ psi2.conj().T)
    return rho


def _as_pure_ensemble(state, D: int):
    """Decompose a state into (weight, padded amplitude vector) pairs."""
    size = D + 1
    if isinstance(state, FockVector):
        if len(state) > size:
            raise ValueError("input state exceeds the requested cutoff")
        vec = np.zeros(size, dtype=complex)
        vec[: len(state)] = state.amps
        return [(1.0, vec)]
    if isinstance(state, DensityMatrix):
        if state.n_modes != 1:
            raise ValueError("conj_output_state inputs must be single-mode")
        if state.dim > size:
            raise ValueError("input state exceeds the requested cutoff")
        evs, vecs = np.linalg.eigh(state.mat)
        out = []
        for w, v in zip(evs, vecs.T):
            if w > 1e-14:
                vec = np.zeros(size, dtype=complex)
                vec[: v.size] = v
                out.append((float(w), vec))
        return out
    raise TypeError("expected FockVector or DensityMatrix")


def conj_output_state(a_input, b_input, eta: float, D: int | None = None) -> DensityMatrix:
    """Transmitted-mode output for inputs a (pure or mixed) and b (mixed).

    Embeds a ⊗ b as a two-mode state, applies the splitter, and traces out
    the reflected mode, using a number-block decomposition rather than a dense
    two-mode unitary. The combined mean photon number must stay at or below
    D/3 so the truncated corner holds no appreciable mass; the tiny leaked
    trace is renormalized away.
    """
    if not 0 <= eta <= 1:
        raise ValueError("transmissivity must lie in [0, 1]")
    if D is None:
        sizes = [len(s) if isinstance(s, FockVector) else s.dim
                 for s in (a_input, b_input)]
        D = max(sizes) - 1
    D = int(D)

    mean_a = a_input.mean_photon()
    mean_b = b_input.mean_photon()
    if mean_a + mean_b > D / 3:
        raise TruncationError(
            f"combined mean photon {mean_a + mean_b:.4g} exceeds the D/3 tail guard "
            f"at D={D}")

    if not isinstance(b_input, DensityMatrix):
        raise TypeError("b_input must be a DensityMatrix")
    if b_input.dim > D + 1:
        raise ValueError("b_input exceeds the requested cutoff")

    a_ens = _as_pure_ensemble(a_input, D)

    if b_input.is_diagonal():
        p = np.zeros(D + 1)
        p[: b_input.dim] = np.real(np.diagonal(b_input.mat))
        rho = np.zeros((D + 1, D + 1), dtype=complex)
        for w, psi in a_ens:
            rho += w * _pure_diag_output(psi, p, eta, D)
    else:
        b_ens = _as_pure_ensemble(b_input, D)
        bsb = bs_blocks(eta, 2 * D)
        rho = np.zeros((D + 1, D + 1), dtype=complex)
        for wa, psi in a_ens:
            for wb, phi in b_ens:
                psi2 = _apply_bs_pure_arrays(psi, phi, bsb)
                rho += (wa * wb) * (psi2 @ psi2.conj().T)

    tr = float(np.real(np.trace(rho)))
    if tr < 1.0 - 1e-6:
        raise TruncationError(
            f"beam-splitter output lost trace {1 - tr:.3e}; increase D")
    rho = rho / tr
    return DensityMatrix(0.5 * (rho + rho.conj().T), dims=(D + 1,))
