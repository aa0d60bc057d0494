"""End-user certification pipeline: estimate, bounds, interval, verdict."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


from . import bounds as bounds_mod
from .estimators import EstimateReport, k0m_estimate
from .measure_solver import DEFAULT_CONFIG, SolveConfig
from .moments import (CancellationError, TracePowers, cumulants,
                      newton_maclaurin, normalize,
                      symmetric_means_from_eigenvalues)
from .spectra import Spectrum


@dataclass
class CertifiedReport:
    """Point estimate plus certified interval for log det, with verdict.

    ``clipped_logdet`` is the deliverable number: the estimate when it
    falls inside the interval, otherwise the nearest endpoint.
    """

    input: dict
    m: int
    estimate: EstimateReport
    bounds: bounds_mod.BoundsReport
    interval: tuple[float, float]
    verdict: str
    clipped_logdet: float
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        lo, hi = self.interval
        return {
            "input": self.input,
            "m": self.m,
            "estimate": {
                "method": self.estimate.method,
                "m": self.estimate.m,
                "kprime0_hat": self.estimate.kprime0_hat,
                "gm_over_am_hat": self.estimate.gm_over_am_hat,
                "logdet_hat": self.estimate.logdet_hat,
            },
            "bounds": {
                "upper": dict(self.bounds.upper),
                "lower": dict(self.bounds.lower),
                "U_best": self.bounds.U_best,
                "L_best": self.bounds.L_best,
                "floor_r": self.bounds.floor_r,
            },
            "interval": [None if math.isinf(lo) else lo, hi],
            "verdict": self.verdict,
            "clipped_logdet": self.clipped_logdet,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CertifiedReport":
        est = d["estimate"]
        estimate = EstimateReport(
            method=est["method"], m=est["m"],
            kprime0_hat=est["kprime0_hat"],
            gm_over_am_hat=est["gm_over_am_hat"],
            logdet_hat=est["logdet_hat"])
        b = d["bounds"]
        brep = bounds_mod.BoundsReport(
            upper=dict(b["upper"]), lower=dict(b["lower"]),
            U_best=b["U_best"], L_best=b["L_best"], floor_r=b["floor_r"])
        lo, hi = d["interval"]
        return cls(input=dict(d["input"]), m=d["m"], estimate=estimate,
                   bounds=brep,
                   interval=(-math.inf if lo is None else lo, hi),
                   verdict=d["verdict"], clipped_logdet=d["clipped_logdet"],
                   warnings=list(d["warnings"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "CertifiedReport":
        return cls.from_dict(json.loads(text))


def certify(tp: TracePowers, m: int, r: float | None = None,
            ks=(2, 3, 4), spectrum: Spectrum | None = None,
            input_desc: dict | None = None,
            cfg: SolveConfig = DEFAULT_CONFIG) -> CertifiedReport:
    """Full pipeline: traces -> estimate -> bounds -> certified interval.

    ``spectrum`` (when the eigenvalues are known, e.g. generated
    benchmarks) only serves as the cancellation-free fallback for the
    symmetric-mean bounds; estimates and bounds always run from traces.
    """
    if m < 2 or m > tp.m:
        raise ValueError(f"m must lie in [2, {tp.m}]")
    nm = normalize(tp)
    am = tp.p[0] / tp.n
    est = k0m_estimate(cumulants(nm), m, n=tp.n, am=am)

    warnings: list[str] = []
    sm = None
    try:
        sm = newton_maclaurin(tp.n * nm.M[:min(4, nm.m)], tp.n)
    except CancellationError as exc:
        if spectrum is not None:
            sm = symmetric_means_from_eigenvalues(
                spectrum.eigenvalues, min(4, nm.m))
        else:
            warnings.append(f"symmetric-mean bounds skipped: {exc}")

    rep = bounds_mod.bounds_report(nm, ks=ks, r=r, sm=sm, cfg=cfg)
    warnings.extend(rep.warnings)
    if rep.U_best is None:
        raise RuntimeError("no upper bound could be computed")
    interval = bounds_mod.certified_interval(tp.p[0], tp.n, rep.U_best,
                                             rep.L_best)
    diag = bounds_mod.gap_diagnostic(est, *interval)
    rep.logdet_interval = interval
    rep.verdict = diag.verdict
    return CertifiedReport(
        input=input_desc or {"n": tp.n, "m": tp.m},
        m=m, estimate=est, bounds=rep, interval=interval,
        verdict=diag.verdict, clipped_logdet=diag.clipped,
        warnings=warnings)
