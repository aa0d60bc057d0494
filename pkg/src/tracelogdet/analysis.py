"""Failure-prediction analytics: Taylor radius, saturation, non-identifiability.

Three ways the trace-power information gap manifests, each computable in
closed form or by direct construction:

* the distance from 0 to the nearest complex singularity of the
  log-moment curve limits the usable interpolation order;
* on two-eigenvalue spectra the integer samples converge while the true
  log-geometric-mean diverges, so every estimate saturates;
* distinct weightings of a common support can match any finite set of
  moment nodes yet differ in mean log, so the target is not identifiable
  from those nodes at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimators import k0m_estimate
from .moments import CumulantSamples

RADIUS_FAMILIES = ("two_point", "log_uniform", "uniform")


class DegenerateSupportError(ValueError):
    """Null direction is orthogonal to log(x); retry with different support."""


@dataclass(frozen=True)
class RadiusReport:
    family: str
    kappa: float
    p: float | None
    radius: float
    safe_order: int  # floor(radius), clamped at 0


@dataclass(frozen=True)
class SaturationRow:
    kappa: float
    m: int
    estimate: float
    truth: float
    rel_error: float


@dataclass(frozen=True)
class SaturationScan:
    rows: list[SaturationRow]
    first_exceed: dict[int, float | None]  # m -> first kappa with |rel| > 50%


@dataclass(frozen=True)
class NonidentPair:
    """Two moment-matched weightings of one support with different mean log."""

    support: np.ndarray
    nodes: tuple[float, ...]
    w_plus: np.ndarray
    w_minus: np.ndarray
    delta_logmean: float


def taylor_radius(family: str, kappa: float,
                  p: float | None = None) -> RadiusReport:
    """Distance from 0 to the nearest singularity of the log-moment curve.

    Closed forms for the three families where the singularities are known:
    two-point with outlier weight p (default 1/2), the log-uniform density
    on [1, kappa], and the uniform density on [1, kappa].  Interpolation
    at orders beyond the radius extrapolates outside the analytic domain
    and diverges.
    """
    if family not in RADIUS_FAMILIES:
        raise ValueError(f"no closed-form radius for family {family!r}")
    if kappa <= 1:
        raise ValueError("kappa must be > 1")
    logk = math.log(kappa)
    if family == "two_point":
        p = 0.5 if p is None else p
        if not 0 < p < 1:
            raise ValueError("weight p must lie in (0, 1)")
        radius = math.sqrt(math.log((1 - p) / p) ** 2 + math.pi ** 2) / logk
    elif family == "log_uniform":
        p = None
        radius = 2 * math.pi / logk
    else:
        p = None
        radius = math.sqrt(1.0 + (2 * math.pi / logk) ** 2)
    return RadiusReport(family=family, kappa=kappa, p=p, radius=radius,
                        safe_order=max(0, math.floor(radius)))


def _two_eig_cumulants(kappa: float, m: int) -> CumulantSamples:
    # spectrum {1, kappa}: x = {2/(1+kappa), 2*kappa/(1+kappa)}
    K = np.zeros(m + 1)
    for j in range(2, m + 1):
        # log(0.5*(x1^j + x2^j)) computed stably via the larger term
        a = j * (math.log(2.0) + math.log(kappa) - math.log1p(kappa))
        t = kappa ** -j
        K[j] = a + math.log1p(t) - math.log(2.0)
    return CumulantSamples(K=K)


def two_eig_truth(kappa: float) -> float:
    """Exact mean log of the normalized two-eigenvalue spectrum {1, kappa}."""
    return math.log(2.0) + 0.5 * math.log(kappa) - math.log1p(kappa)


def saturation_scan(kappas, orders) -> SaturationScan:
    """Estimates vs truth on {1, kappa} spectra across condition numbers.

    The integer samples converge as kappa grows, so every order's
    estimate flattens to a finite limit while the truth diverges; the
    scan records, per order, the first kappa whose relative error
    magnitude crosses 50%.
    """
    orders = sorted(orders)
    rows: list[SaturationRow] = []
    first_exceed: dict[int, float | None] = {m: None for m in orders}
    for kappa in kappas:
        if kappa < 1:
            raise ValueError("kappa must be >= 1")
        truth = two_eig_truth(kappa) if kappa > 1 else 0.0
        K = _two_eig_cumulants(kappa, max(orders)) if kappa > 1 else \
            CumulantSamples(K=np.zeros(max(orders) + 1))
        for m in orders:
            est = k0m_estimate(K, m).kprime0_hat
            rel = (est - truth) / abs(truth) if truth != 0 else 0.0
            rows.append(SaturationRow(kappa=float(kappa), m=m, estimate=est,
                                      truth=truth, rel_error=rel))
            if first_exceed[m] is None and abs(rel) > 0.5:
                first_exceed[m] = float(kappa)
    return SaturationScan(rows=rows, first_exceed=first_exceed)


def nonidentifiable_pair(support, nodes, eps: float = math.inf) -> NonidentPair:
    """Two weightings of ``support`` sharing mass, mean and all ``nodes`` moments.

    Builds the constraint matrix with rows ``{1, x}`` and ``x**t`` per
    node, takes a null direction ``v``, and returns ``w0 +- eps*v`` around
    a strictly positive mean-one base.  ``eps`` is shrunk to keep both
    weight vectors nonnegative; the default takes the largest feasible
    value.  The two members are indistinguishable from moments at the
    nodes, yet their mean logs differ.
    """
    x = np.asarray(support, dtype=float)
    nodes = tuple(float(t) for t in nodes)
    if x.size < len(nodes) + 3:
        raise ValueError("need at least len(nodes) + 3 support points")
    if np.unique(x).size != x.size or np.any(x <= 0):
        raise ValueError("support points must be distinct and positive")

    A = np.vstack([np.ones_like(x), x] + [x ** t for t in nodes])
    _, svals, Vt = np.linalg.svd(A)
    v = Vt[-1]
    if np.max(np.abs(A @ v)) > 1e-12 * np.max(np.abs(A)):
        raise DegenerateSupportError("support gives no usable null direction")
    logx = np.log(x)
    if abs(np.dot(v, logx)) < 1e-12:
        raise DegenerateSupportError(
            "null direction orthogonal to log(x); change the support")

    w0 = _positive_base(x)
    active = np.abs(v) > 1e-14
    eps_max = float(np.min(w0[active] / np.abs(v)[active]))
    eps_used = min(eps, eps_max)
    if eps_used < 0:
        raise ValueError("eps must be nonnegative")
    w_plus = w0 + eps_used * v
    w_minus = w0 - eps_used * v
    delta = 2.0 * eps_used * float(np.dot(v, logx))
    return NonidentPair(support=x, nodes=nodes, w_plus=w_plus,
                        w_minus=w_minus, delta_logmean=delta)


def _positive_base(x: np.ndarray) -> np.ndarray:
    """Strictly positive weights with unit mass and unit mean."""
    C = np.vstack([np.ones_like(x), x])
    d = np.array([1.0, 1.0])
    w = np.full(x.size, 1.0 / x.size)
    for _ in range(200):
        # project onto the affine constraint set, then clip
        w = w + C.T @ np.linalg.solve(C @ C.T, d - C @ w)
        if np.all(w > 1e-9):
            return w
        w = np.clip(w, 1e-3, None)
    raise DegenerateSupportError("could not find a positive mean-one base")
