"""Deterministic bounds on GM/AM from moments, and the certified interval.

Upper bounds need only the trace moments.  Lower bounds additionally need
a spectral floor ``r <= lambda_min/AM``; without one, no lower bound is
reported rather than inventing a floor.  All bound values live on the
mean-normalized scale, so 1 is the degenerate equality case and the true
GM/AM always lies in ``(0, 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .estimators import EstimateReport
from .measure_solver import (DEFAULT_CONFIG, AtomicMeasure, SolveConfig,
                             solve)
from .moments import NormalizedMoments, SymmetricMeans

UPPER_KINDS = ("maclaurin", "rodin", "last_slope", "combined")


@dataclass
class BoundsReport:
    """All computed bounds plus the certified log-det interval."""

    upper: dict[str, float] = field(default_factory=dict)
    lower: dict[str, float] = field(default_factory=dict)
    U_best: float | None = None
    L_best: float | None = None
    floor_r: float | None = None
    logdet_interval: tuple[float, float] | None = None
    verdict: str | None = None
    warnings: list[str] = field(default_factory=list)

    def finalize_best(self):
        self.U_best = min(self.upper.values()) if self.upper else None
        self.L_best = max(self.lower.values()) if self.lower else None
        if (self.U_best is not None and self.L_best is not None
                and self.L_best > self.U_best * (1 + 1e-9)):
            raise ValueError("inconsistent bounds: L_best > U_best")


@dataclass(frozen=True)
class GapDiagnostic:
    clipped: float
    verdict: str
    width: float


def rodin_upper(M2: float, n: int) -> float:
    """Sharp mean-variance upper bound; equality for two-point spectra."""
    if M2 < 1.0:
        raise ValueError("M_2 < 1 violates Jensen")
    if n < 2:
        return 1.0
    d = math.sqrt((M2 - 1.0) / (n - 1))
    if d >= 1.0:
        raise ValueError("M_2 too large for the given n (no real spectrum)")
    return (1.0 - d) ** ((n - 1) / n) * (1.0 + (n - 1) * d) ** (1.0 / n)


def closed_form_upper(kind: str, sm: SymmetricMeans | None = None,
                      M2: float | None = None, n: int | None = None,
                      m: int | None = None) -> float:
    """Closed-form upper bounds on GM/AM.

    maclaurin:   E_m**(1/m)
    rodin:       two-point mean-variance bound (needs M2 and n)
    last_slope:  extrapolates the log-concave decay of the E_k sequence,
                 [E_m (E_m/E_{m-1})**(n-m)]**(1/n)
    combined:    min of the three at m = 4
    """
    if kind not in UPPER_KINDS:
        raise ValueError(f"unknown bound kind {kind!r}")
    if kind == "rodin":
        if M2 is None or n is None:
            raise ValueError("rodin needs M2 and n")
        return rodin_upper(M2, n)
    if kind == "combined":
        return min(closed_form_upper("rodin", M2=M2, n=n),
                   closed_form_upper("maclaurin", sm=sm, m=4),
                   closed_form_upper("last_slope", sm=sm, m=4))
    if sm is None or m is None:
        raise ValueError(f"{kind} needs symmetric means and m")
    if m < 1 or m > sm.logE.size:
        raise ValueError("m out of range for the available symmetric means")
    if kind == "maclaurin":
        return math.exp(sm.logE[m - 1] / m)
    # last slope, in log space to avoid overflow for large n
    if m < 2:
        raise ValueError("last_slope needs m >= 2")
    return math.exp((sm.logE[m - 1] + (sm.n - m) * sm.slopes[m - 1]) / sm.n)


def lower_k2_closed(M2: float, r: float) -> float:
    """Two-moment lower bound with floor r; sharp for two-point spectra."""
    if M2 < 1.0:
        raise ValueError("M_2 < 1 violates Jensen")
    if M2 == 1.0:
        return 1.0
    if not 0.0 < r < 1.0:
        raise ValueError("floor must satisfy 0 < r < 1 when M_2 > 1")
    w1 = (M2 - 1.0) / ((r - 1.0) ** 2 + (M2 - 1.0))
    x2 = (1.0 - w1 * r) / (1.0 - w1)
    return r ** w1 * x2 ** (1.0 - w1)


def _rodin_witness(M2: float, n: int) -> AtomicMeasure:
    d = math.sqrt((M2 - 1.0) / (n - 1))
    return AtomicMeasure(np.array([1.0 - d, 1.0 + (n - 1) * d]),
                         np.array([(n - 1) / n, 1.0 / n]))


def _k2_lower_witness(M2: float, r: float) -> AtomicMeasure:
    if M2 == 1.0:
        return AtomicMeasure(np.array([1.0]), np.array([1.0]))
    w1 = (M2 - 1.0) / ((r - 1.0) ** 2 + (M2 - 1.0))
    x2 = (1.0 - w1 * r) / (1.0 - w1)
    return AtomicMeasure(np.array([r, x2]), np.array([w1, 1.0 - w1]))


def ktrace_bound(sense: str, nm: NormalizedMoments, k: int,
                 r: float | None = None, cfg: SolveConfig = DEFAULT_CONFIG,
                 force_solver: bool = False) -> tuple[float, AtomicMeasure]:
    """Moment-constrained bound using traces ``1..k``.

    k = 2 dispatches to the closed forms (upper: finite-n two-point bound,
    lower: the pinned-floor two-atom formula); k >= 3 solves the
    ``(k+1)``-atom program.  ``force_solver`` routes k = 2 through the
    solver as a conformance cross-check: the upper case freezes the
    two-point weight profile ``((n-1)/n, 1/n)`` the closed form assumes.
    """
    if sense not in ("upper", "lower"):
        raise ValueError("sense must be 'upper' or 'lower'")
    if k < 1 or k > nm.m:
        raise ValueError(f"k must lie in [1, {nm.m}]")
    if sense == "lower" and (r is None or r <= 0):
        raise ValueError("lower bound requires a floor r > 0")

    if k == 2 and not force_solver:
        M2 = nm.M[1]
        if sense == "upper":
            return rodin_upper(M2, nm.n), _rodin_witness(M2, nm.n)
        return lower_k2_closed(M2, r), _k2_lower_witness(M2, r)

    if k == 1 and sense == "upper":
        return 1.0, AtomicMeasure(np.array([1.0]), np.array([1.0]))

    M = nm.M[:k]
    if k == 2 and sense == "upper":  # force_solver path
        n = nm.n
        obj, mu = solve("max", M, cfg=cfg,
                        fixed_weights=np.array([(n - 1) / n, 1.0 / n]))
        return math.exp(obj), mu
    obj, mu = solve("max" if sense == "upper" else "min", M, r=r, cfg=cfg)
    return math.exp(obj), mu


def certified_interval(p1: float, n: int, U: float,
                       L: float | None = None) -> tuple[float, float]:
    """Certified enclosure of log det from GM/AM bounds: n(log AM + log bound)."""
    if p1 <= 0 or n < 1:
        raise ValueError("need p1 > 0 and n >= 1")
    if L is not None and not 0 < L <= U * (1 + 1e-9):
        raise ValueError("need 0 < L <= U")
    base = n * math.log(p1 / n)
    hi = base + n * math.log(U)
    lo = base + n * math.log(L) if L is not None else -math.inf
    # sharp instances have L = U up to rounding; collapse the noise
    return min(lo, hi), hi


def gap_diagnostic(estimate: EstimateReport, lo: float,
                   hi: float) -> GapDiagnostic:
    """Clip a point estimate into the certified interval.

    The interval is closed: an estimate exactly on a bound counts as
    inside.  A missing floor (lo = -inf) is reported as its own verdict
    when it leaves the estimate unclipped.
    """
    if lo > hi:
        raise ValueError("empty interval")
    value = estimate.logdet_hat
    if value is None:
        raise ValueError("estimate carries no logdet value to clip")
    width = hi - lo
    if value > hi:
        return GapDiagnostic(hi, "clipped_to_upper", width)
    if value < lo:
        return GapDiagnostic(lo, "clipped_to_lower", width)
    if math.isinf(lo):
        return GapDiagnostic(value, "no_lower_bound", width)
    return GapDiagnostic(value, "estimate_inside", width)


def bounds_report(nm: NormalizedMoments, ks=(2, 3, 4),
                  r: float | None = None,
                  sm: SymmetricMeans | None = None,
                  cfg: SolveConfig = DEFAULT_CONFIG) -> BoundsReport:
    """Assemble every bound available from the given inputs.

    Solver failures and missing prerequisites degrade to warnings; the
    report carries whatever could be computed.
    """
    rep = BoundsReport(floor_r=r)
    M2 = nm.M[1] if nm.m >= 2 else None
    if M2 is not None:
        rep.upper["rodin"] = rodin_upper(M2, nm.n)
    if sm is not None:
        m_top = min(4, sm.logE.size)
        rep.upper[f"maclaurin_{m_top}"] = closed_form_upper(
            "maclaurin", sm=sm, m=m_top)
        if m_top >= 2:
            rep.upper[f"last_slope_{m_top}"] = closed_form_upper(
                "last_slope", sm=sm, m=m_top)
    for k in ks:
        if k < 3 or k > nm.m:
            continue
        try:
            val, _ = ktrace_bound("upper", nm, k, cfg=cfg)
            rep.upper[f"ktrace_{k}"] = val
        except RuntimeError as exc:
            rep.warnings.append(f"upper ktrace_{k}: {exc}")
    if r is not None and M2 is not None:
        rep.lower["k2_closed"] = lower_k2_closed(M2, r)
        for k in ks:
            if k < 3 or k > nm.m:
                continue
            try:
                val, _ = ktrace_bound("lower", nm, k, r=r, cfg=cfg)
                rep.lower[f"ktrace_{k}"] = val
            except RuntimeError as exc:
                rep.warnings.append(f"lower ktrace_{k}: {exc}")
        if not rep.lower:
            rep.verdict = "no_lower_bound"
    rep.finalize_best()
    return rep
