"""Scalar information-theory utilities.

The thermal-state entropy function ``g``, Shannon entropy, photon-count
distribution families (Poisson, binomial, Bose-Einstein), binomial thinning,
and the parameter/entropy root finders the rest of the library is built on.
All entropies and rates are in bits unless stated otherwise.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .errors import EntropyTargetError, TruncationError

DEFAULT_TAIL_TOL = 1e-10

_FAMILIES = ("poisson", "binomial", "bose_einstein")


class ProbVector:
    """Probability distribution over photon counts 0..D with a truncation diagnostic.

    Entries are renormalized on construction so they sum to one; ``tail_mass``
    records how much probability the generating family assigned beyond the
    cutoff before renormalization.
    """

    __slots__ = ("probs", "tail_mass")

    def __init__(self, probs, tail_mass: float = 0.0):
        arr = np.asarray(probs, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("probs must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(arr)):
            raise ValueError("probs must be finite")
        if np.any(arr < 0):
            raise ValueError("probs must be nonnegative")
        total = arr.sum()
        if total <= 0:
            raise ValueError("probs must have positive total mass")
        self.probs = arr / total
        self.tail_mass = float(tail_mass)

    @property
    def cutoff(self) -> int:
        return self.probs.size - 1

    def __len__(self) -> int:
        return self.probs.size

    def mean(self) -> float:
        """Mean photon number of the distribution."""
        return float(np.arange(self.probs.size) @ self.probs)


def g_of(x):
    """Entropy of a thermal state with mean photon number ``x``, in bits.

    ``g(x) = (1+x) log2(1+x) - x log2(x)`` with ``g(0) = 0`` by continuity.
    Accepts a scalar or an ndarray and evaluates elementwise.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("g_of argument must be finite")
    if np.any(arr < 0):
        raise ValueError("g_of argument must be nonnegative")
    # x*log2(x) evaluated as 0 at x = 0 by substituting 1 inside the log
    safe = np.where(arr > 0, arr, 1.0)
    out = (1.0 + arr) * np.log2(1.0 + arr) - safe * np.log2(safe)
    if np.ndim(x) == 0:
        return float(out)
    return out


def g_inverse(y: float, *, tol: float = 1e-12, max_iter: int = 200) -> float:
    """Inverse of :func:`g_of` by bisection on the strictly increasing branch.

    Returns ``x >= 0`` with ``|g_of(x) - y| < tol``.
    """
    y = float(y)
    if not np.isfinite(y) or y < 0:
        raise ValueError("g_inverse argument must be a nonnegative finite number")
    if y == 0.0:
        return 0.0
    # g(x) >= log2(1+x), so x = 2**y always brackets the root from above
    lo, hi = 0.0, 2.0 ** min(y, 1000.0)
    x = hi
    for _ in range(max_iter):
        x = 0.5 * (lo + hi)
        val = g_of(x)
        if abs(val - y) < tol:
            return x
        if val < y:
            lo = x
        else:
            hi = x
    if abs(g_of(x) - y) < 10 * tol:
        return x
    raise RuntimeError(f"g_inverse failed to converge for y={y}")


def shannon_entropy(p) -> float:
    """Shannon entropy in bits, with 0*log(0) = 0.

    Accepts a :class:`ProbVector` or a plain probability array.
    """
    arr = getattr(p, "probs", p)
    arr = np.asarray(arr, dtype=float)
    nz = arr[arr > 0]
    return float(-(nz @ np.log2(nz)))


def make_distribution(family: str, D: int, *, lam=None, M=None, p=None, K=None,
                      tail_tol: float = DEFAULT_TAIL_TOL) -> ProbVector:
    """Build a truncated, renormalized photon-count distribution.

    Families and their parameters:

    * ``poisson``       -- intensity ``lam > 0``
    * ``binomial``      -- trials ``M >= 1`` and success probability ``p`` in [0,1]
    * ``bose_einstein`` -- mean photon number ``K >= 0`` (geometric law
      ``p_n = K^n / (1+K)^(n+1)``)

    Raises :class:`TruncationError` if the mass beyond the cutoff ``D`` is at
    least ``tail_tol``; the message names a sufficient cutoff.
    """
    D = int(D)
    if D < 0:
        raise ValueError("cutoff D must be >= 0")
    n = np.arange(D + 1)

    if family == "poisson":
        if lam is None or lam <= 0:
            raise ValueError("poisson family requires lam > 0")
        logpmf = n * np.log(lam) - lam - gammaln(n + 1)
        raw = np.exp(logpmf)
        tail = max(0.0, 1.0 - float(raw.sum()))
        if tail >= tail_tol:
            need = int(stats.poisson.isf(tail_tol / 4, lam)) + 2
            raise TruncationError(
                f"poisson(lam={lam}) tail mass {tail:.3e} at D={D}; need D >= {need}")
        return ProbVector(raw, tail_mass=tail)

    if family == "binomial":
        if M is None or int(M) < 1 or M != int(M):
            raise ValueError("binomial family requires integer M >= 1")
        if p is None or not 0 <= p <= 1:
            raise ValueError("binomial family requires p in [0, 1]")
        M = int(M)
        if M > D:
            raise TruncationError(
                f"binomial(M={M}) does not fit below cutoff D={D}; need D >= {M}")
        raw = stats.binom.pmf(np.arange(M + 1), M, p)
        full = np.zeros(D + 1)
        full[: M + 1] = raw
        return ProbVector(full, tail_mass=0.0)

    if family == "bose_einstein":
        if K is None or K < 0:
            raise ValueError("bose_einstein family requires K >= 0")
        if K == 0:
            delta = np.zeros(D + 1)
            delta[0] = 1.0
            return ProbVector(delta, tail_mass=0.0)
        ratio = K / (1.0 + K)
        tail = ratio ** (D + 1)
        if tail >= tail_tol:
            need = int(np.ceil(np.log(tail_tol) / np.log(ratio))) + 1
            raise TruncationError(
                f"bose_einstein(K={K}) tail mass {tail:.3e} at D={D}; need D >= {need}")
        raw = np.exp(n * np.log(ratio) - np.log1p(K))
        return ProbVector(raw, tail_mass=tail)

    raise ValueError(f"unknown family {family!r}; expected one of {_FAMILIES}")


@lru_cache(maxsize=32)
def _thinning_matrix_cached(tau: float, size: int) -> np.ndarray:
    k = np.arange(size)[:, None]
    n = np.arange(size)[None, :]
    valid = k <= n
    d = np.where(valid, n - k, 0)
    logm = (gammaln(n + 1) - gammaln(k + 1) - gammaln(d + 1)
            + k * np.log(tau) + d * np.log1p(-tau))
    mat = np.where(valid, np.exp(logm), 0.0)
    mat.flags.writeable = False
    return mat


def thinning_matrix(tau: float, D: int) -> np.ndarray:
    """Column-stochastic matrix mapping a photon-count law to its thinned law.

    Entry (k, n) is C(n,k) tau^k (1-tau)^(n-k), evaluated through log-gamma so
    cutoffs beyond n ~ 170 do not overflow.
    """
    if not 0 < tau < 1:
        raise ValueError("thinning_matrix requires 0 < tau < 1")
    return _thinning_matrix_cached(float(tau), int(D) + 1)


def thin(pv: ProbVector, tau: float) -> ProbVector:
    """Binomially thin a photon-count distribution: each photon survives with
    probability ``tau`` independently."""
    if not 0 <= tau <= 1:
        raise ValueError("thinning parameter must lie in [0, 1]")
    if tau == 1:
        return ProbVector(pv.probs.copy(), tail_mass=pv.tail_mass)
    if tau == 0:
        q = np.zeros(len(pv))
        q[0] = 1.0
        return ProbVector(q, tail_mass=pv.tail_mass)
    q = thinning_matrix(tau, pv.cutoff) @ pv.probs
    return ProbVector(q, tail_mass=pv.tail_mass)


def _family_entropy(family, value, D, M, tail_tol):
    if family == "poisson":
        dist = make_distribution(family, D, lam=value, tail_tol=tail_tol)
    elif family == "binomial":
        dist = make_distribution(family, D, M=M, p=value, tail_tol=tail_tol)
    else:
        dist = make_distribution(family, D, K=value, tail_tol=tail_tol)
    return shannon_entropy(dist)


def match_entropy(family: str, target: float, D: int, *, M=None,
                  tail_tol: float = DEFAULT_TAIL_TOL, tol: float = 1e-9,
                  max_iter: int = 200) -> float:
    """Find the family parameter whose distribution has the given entropy.

    Returns ``lam`` for Poisson, ``p`` for binomial (with ``M`` fixed,
    restricted to p in [0, 1/2] where entropy increases), or ``K`` for
    Bose-Einstein, such that ``|H - target| < tol``.

    Raises :class:`EntropyTargetError` when the target exceeds what the family
    can reach (reporting the maximum), and propagates
    :class:`TruncationError` when the cutoff ``D`` is the limiting factor.
    """
    if family not in _FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    target = float(target)
    if target < 0:
        raise ValueError("entropy target must be nonnegative")
    if target == 0.0:
        return 0.0

    if family == "binomial":
        if M is None:
            raise ValueError("binomial match requires M")
        lo, hi = 0.0, 0.5
        hmax = _family_entropy(family, hi, D, M, tail_tol)
        if target > hmax + tol:
            raise EntropyTargetError(
                f"binomial(M={M}) cannot reach {target:.9g} bits; "
                f"max entropy is {hmax:.9g} bits at p=1/2")
    else:
        lo, hi = 0.0, 1.0
        while _family_entropy(family, hi, D, M, tail_tol) < target:
            hi *= 2.0
            if hi > 1e9:
                raise EntropyTargetError(
                    f"{family} could not bracket {target:.9g} bits")

    x = hi
    for _ in range(max_iter):
        x = 0.5 * (lo + hi)
        h = _family_entropy(family, x, D, M, tail_tol)
        if abs(h - target) < tol:
            return x
        if h < target:
            lo = x
        else:
            hi = x
    h = _family_entropy(family, x, D, M, tail_tol)
    if abs(h - target) < 10 * tol:
        return x
    raise EntropyTargetError(
        f"{family} entropy match did not converge to {target:.9g} bits (got {h:.9g})")
