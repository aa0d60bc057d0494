"""Moment pipeline: trace powers -> normalized moments -> cumulant samples.

All estimators and bounds consume the mean-normalized eigenvalue variable
``x_i = lambda_i / AM`` through its moments ``M_k = mean(x**k)``.  With
``M_1 = 1`` the cumulant samples ``K(k) = log M_k`` satisfy
``K(0) = K(1) = 0`` exactly, which anchors every interpolation scheme
downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_EPS = np.finfo(float).eps
# assumed relative accuracy of incoming power sums
_EPS_INPUT = 8 * _EPS
# relative error estimate above which Newton-identity output is garbage
_CANCEL_TOL = 1e-6


class CancellationError(ArithmeticError):
    """Newton's identities lost too many digits to alternating cancellation.

    Callers holding explicit eigenvalues should fall back to
    ``symmetric_means_from_eigenvalues``, which is cancellation-free.
    """


@dataclass(frozen=True)
class TracePowers:
    """Power sums ``p_k``, ``k = 1..m``, of an n-point spectrum.

    This is the only matrix-derived input the toolkit ever sees.
    """

    n: int
    p: np.ndarray  # p[k-1] = p_k

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.p.ndim != 1 or self.p.size < 1:
            raise ValueError("need at least p_1")
        if not np.all(self.p > 0):
            raise ValueError("trace powers of an SPD matrix must be positive")

    @property
    def m(self) -> int:
        return self.p.size


@dataclass(frozen=True)
class NormalizedMoments:
    """Moments ``M_k = n**(k-1) * p_k / p_1**k`` with ``M_1 = 1`` exact."""

    n: int
    M: np.ndarray  # M[k-1] = M_k

    def __post_init__(self):
        object.__setattr__(self, "M", np.asarray(self.M, dtype=float))
        if self.M[0] != 1.0:
            raise ValueError("M_1 must be exactly 1")
        if not np.all(self.M > 0):
            raise ValueError("moments must be positive")

    @property
    def m(self) -> int:
        return self.M.size


@dataclass(frozen=True)
class CumulantSamples:
    """Integer samples ``K(0..m)`` of the log-moment curve, ``K[0]=K[1]=0``."""

    K: np.ndarray  # K[j] = K(j)

    def __post_init__(self):
        object.__setattr__(self, "K", np.asarray(self.K, dtype=float))
        if self.K[0] != 0.0 or self.K[1] != 0.0:
            raise ValueError("K(0) and K(1) must be exactly 0")

    @property
    def m(self) -> int:
        return self.K.size - 1


@dataclass(frozen=True)
class SymmetricMeans:
    """Log of normalized elementary symmetric means and their slopes.

    ``logE[k-1] = log(e_k / C(n,k))`` and ``slopes[k-1] = logE_k - logE_{k-1}``
    (with ``logE_0 = 0``).  For mean-normalized inputs ``logE_1 = 0`` and the
    slopes are nonincreasing.
    """

    n: int
    logE: np.ndarray
    slopes: np.ndarray


def normalize(tp: TracePowers) -> NormalizedMoments:
    """Trace powers to normalized moments, forcing ``M_1 = 1`` exactly."""
    n, p = tp.n, tp.p
    am = p[0] / n
    ks = np.arange(1, tp.m + 1)
    with np.errstate(over="ignore"):
        M = p / (n * am ** ks)
    if not np.all(np.isfinite(M)):
        # rescaling overflowed even though M_k itself is representable
        logM = np.log(p) + (ks - 1) * math.log(n) - ks * math.log(p[0])
        M = np.exp(logM)
    M[0] = 1.0
    return NormalizedMoments(n=n, M=M)


def cumulants(nm: NormalizedMoments) -> CumulantSamples:
    K = np.zeros(nm.m + 1)
    K[2:] = np.log(nm.M[1:])
    return CumulantSamples(K=K)


def log_binomial(n: int, k: int) -> float:
    return (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1))


def newton_maclaurin(q, n: int) -> SymmetricMeans:
    """Elementary symmetric means from power sums via Newton's identities.

    ``q`` holds the normalized power sums ``q_1..q_m`` (``q_k = n * M_k``).
    The recurrence ``k*e_k = sum_j (-1)**(j-1) e_{k-j} q_j`` alternates in
    sign, so a running error bound is propagated; if any ``e_k`` is
    nonpositive or its estimated relative error exceeds 1e-6 a
    CancellationError is raised rather than returning garbage.
    """
    q = np.asarray(q, dtype=float)
    m = q.size
    if m > n:
        raise ValueError("cannot form e_k beyond k = n")
    e = [1.0]
    err = [0.0]
    for k in range(1, m + 1):
        terms = [(-1.0) ** (j - 1) * e[k - j] * q[j - 1]
                 for j in range(1, k + 1)]
        s = math.fsum(terms)
        e_k = s / k
        abs_terms = math.fsum(abs(t) for t in terms)
        err_k = (math.fsum(err[k - j] * q[j - 1] for j in range(1, k + 1))
                 + abs_terms * _EPS_INPUT) / k
        if e_k <= 0 or err_k > _CANCEL_TOL * e_k:
            raise CancellationError(
                f"e_{k} lost too much precision (value {e_k:.3e}, "
                f"error estimate {err_k:.3e})")
        e.append(e_k)
        err.append(err_k)
    logE = np.array([math.log(e[k]) - log_binomial(n, k)
                     for k in range(1, m + 1)])
    slopes = np.diff(logE, prepend=0.0)
    return SymmetricMeans(n=n, logE=logE, slopes=slopes)


def esp_from_values(values, m: int) -> np.ndarray:
    """Elementary symmetric polynomials ``e_1..e_m`` of positive values.

    All-positive accumulation, so unlike the Newton-identity route there
    is no cancellation; used as the exact-eigenvalue fallback and as a
    test oracle.
    """
    values = np.asarray(values, dtype=float)
    e = np.zeros(m + 1)
    e[0] = 1.0
    for i, v in enumerate(values):
        top = min(i + 1, m)
        e[1:top + 1] += v * e[0:top]
    return e[1:]


def symmetric_means_from_eigenvalues(eigenvalues, m: int) -> SymmetricMeans:
    """Cancellation-free SymmetricMeans straight from explicit eigenvalues."""
    lam = np.asarray(eigenvalues, dtype=float)
    n = lam.size
    x = lam / (math.fsum(lam) / n)
    e = esp_from_values(x, m)
    logE = np.array([math.log(e[k - 1]) - log_binomial(n, k)
                     for k in range(1, m + 1)])
    slopes = np.diff(logE, prepend=0.0)
    return SymmetricMeans(n=n, logE=logE, slopes=slopes)


def central_moments(nm: NormalizedMoments, order: int) -> np.ndarray:
    """Central moments ``mu_k = E[(X-1)**k]`` for ``k = 2..order``."""
    if order < 2 or order > nm.m:
        raise ValueError("order must lie in [2, m]")
    M = np.concatenate([[1.0], nm.M])  # M[j] = M_j with M_0 = 1
    mu = []
    for k in range(2, order + 1):
        terms = [math.comb(k, j) * (-1.0) ** (k - j) * M[j]
                 for j in range(k + 1)]
        mu.append(math.fsum(terms))
    return np.array(mu)


def boxcox_samples(nm: NormalizedMoments, alpha: complex) -> np.ndarray:
    """Power-transformed samples ``G(k) = Re[(M_k**alpha - 1)/alpha]``.

    ``alpha`` may be complex; the log-domain limit ``alpha -> 0`` is served
    by ``cumulants`` instead.  ``G(0) = G(1) = 0`` exactly, matching the
    cumulant anchors, and the transform has unit derivative at ``M = 1``,
    so the interpolation weights need no rescaling.
    """
    alpha = complex(alpha)
    if alpha == 0:
        raise ValueError("alpha = 0 means the log transform: use cumulants()")
    G = np.zeros(nm.m + 1)
    for k in range(2, nm.m + 1):
        G[k] = ((complex(nm.M[k - 1]) ** alpha - 1.0) / alpha).real
    return G
