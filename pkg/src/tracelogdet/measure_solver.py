"""Moment-constrained atomic-measure programs behind the k-trace bounds.

Solves, over discrete probability measures with at most ``k+1`` atoms,

    max/min  sum_i w_i log(x_i)
    s.t.     sum_i w_i x_i**j = M_j   (j = 1..k),  sum_i w_i = 1,
             x_i > 0 (min sense: x_i >= r with one atom pinned at r).

Extremal measures of truncated moment problems are canonical quadrature
rules of the moment sequence, so the multistart pool is seeded with
Gauss rules (max sense) and fixed-node Radau rules (min sense) built
from the moments themselves, plus ladders of far small-weight atoms that
absorb surplus in the highest moments.  Those structured points are
already feasible and sit at or near the optimum; SLSQP refinement and
random restarts cover the rest.  Weights are re-solved by nonnegative
least squares at fixed atoms before a candidate is admitted, which
drives moment residuals down to linear-algebra precision.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

_BIG_CAP = 1e3  # atom cap multiplier on M_k**(1/k); never binds at optimum


class InfeasibleError(RuntimeError):
    """No restart produced a measure meeting the moment residual tolerance."""


class SolverStalledError(RuntimeError):
    """Every restart exhausted its iteration budget without converging."""


@dataclass(frozen=True)
class SolveConfig:
    restarts: int = 8
    max_iter: int = 500
    tol_feas: float = 1e-8   # max moment residual, each scaled by max(1, M_j)
    tol_opt: float = 1e-9
    seed: int = 0
    atom_floor: float = 1e-12

    def __post_init__(self):
        if min(self.tol_feas, self.tol_opt, self.atom_floor) <= 0:
            raise ValueError("tolerances must be positive")


DEFAULT_CONFIG = SolveConfig()


@dataclass(frozen=True)
class AtomicMeasure:
    """Weighted atoms ``(x_i, w_i)`` with ``sum w = 1``, sorted by location."""

    x: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        w = np.asarray(self.w, dtype=float)
        order = np.argsort(x)
        object.__setattr__(self, "x", x[order])
        object.__setattr__(self, "w", w[order])
        if np.any(self.x <= 0) or np.any(self.w < 0):
            raise ValueError("atoms must be positive with nonnegative weights")
        if abs(math.fsum(self.w) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.w.tolist()))

    def log_mean(self) -> float:
        return math.fsum(wi * math.log(xi) for xi, wi in zip(self.x, self.w))

    def moment(self, j: int) -> float:
        return math.fsum(wi * xi ** j for xi, wi in zip(self.x, self.w))


def moment_residual(mu: AtomicMeasure, M) -> float:
    """Largest absolute deviation of the measure's moments from ``M_1..M_k``."""
    M = np.asarray(M, dtype=float)
    return max(abs(mu.moment(j + 1) - M[j]) for j in range(M.size))


# ---------------------------------------------------------------------------
# canonical quadrature machinery (moments -> recurrence -> rules)
# ---------------------------------------------------------------------------

def _recurrence(mom: np.ndarray):
    """Three-term recurrence coefficients from raw moments ``m_0..m_L``.

    Returns ``(a, b, exhausted)`` with as many coefficients as the moment
    list supports: ``b_j`` for ``j <= L//2`` and ``a_j`` for
    ``j <= (L-1)//2``.  ``exhausted`` is the truncation level at which the
    underlying measure ran out of atoms (Hankel rank), or None.
    """
    L = mom.size - 1
    nb = L // 2
    na = (L - 1) // 2
    a = np.full(na + 1, np.nan)
    b = np.full(nb + 1, np.nan)
    a[0] = mom[1] / mom[0]
    b[0] = mom[0]
    sig_prev = np.zeros(mom.size)
    sig = mom.astype(float).copy()
    for j in range(1, nb + 1):
        sig_new = np.zeros(mom.size)
        for l in range(j, L - j + 1):
            sig_new[l] = (sig[l + 1] - a[j - 1] * sig[l]
                          - b[j - 1] * sig_prev[l])
        # sigma_{j,j} = ||p_j||^2 > 0 unless the measure has <= j atoms
        if sig_new[j] <= 0 or sig_new[j] < 1e-13 * abs(sig[j - 1]):
            return a[:j], b[:j], j
        b[j] = sig_new[j] / sig[j - 1]
        if j <= na:
            a[j] = sig_new[j + 1] / sig_new[j] - sig[j] / sig[j - 1]
        sig_prev, sig = sig, sig_new
    return a, b, None


def _moment_scale(mom: np.ndarray) -> float:
    # working on moments of x/c equilibrates the sigma recursion; the
    # recurrence coefficients come back in x/c units
    L = mom.size - 1
    return max(mom[-1] ** (1.0 / L), 1e-8) if L >= 1 else 1.0


def _scaled_recurrence(mom: np.ndarray):
    c = _moment_scale(mom)
    ms = mom / c ** np.arange(mom.size)
    a, b, exhausted = _recurrence(ms)
    return a, b, exhausted, c


def _rule_from_jacobi(diag, offdiag_sq, mass, c=1.0):
    T = np.diag(diag) + np.diag(np.sqrt(offdiag_sq), 1) \
        + np.diag(np.sqrt(offdiag_sq), -1)
    vals, vecs = np.linalg.eigh(T)
    return c * vals, mass * vecs[0] ** 2


def _gauss_rule(mom: np.ndarray, J: int):
    """J-point rule matching ``m_0..m_{2J-1}``; None if not constructible."""
    a, b, exhausted, c = _scaled_recurrence(mom)
    if exhausted is not None and exhausted < J:
        J = exhausted
    if len(a) < J or len(b) < J:
        return None
    return _rule_from_jacobi(a[:J], b[1:J], mom[0], c)


def _monic_eval(a, b, r: float, j: int) -> tuple[float, float]:
    """Values ``(p_{j-1}(r), p_j(r))`` of the monic orthogonal polynomials."""
    pm, p = 0.0, 1.0
    for i in range(j):
        pm, p = p, (r - a[i]) * p - (b[i] * pm if i > 0 else 0.0)
    return pm, p


def _radau_rule(mom: np.ndarray, r: float, J: int):
    """J-point rule with one node pinned at ``r``, matching ``m_0..m_{2J-2}``."""
    if J < 1:
        return None
    if J == 1:
        return np.array([r]), np.array([mom[0]])
    a, b, exhausted, c = _scaled_recurrence(mom)
    n = J - 1
    if exhausted is not None and exhausted <= n:
        return _rule_from_jacobi(a[:exhausted], b[1:exhausted], mom[0], c)
    if len(a) < n or len(b) < n + 1:
        return None
    rs = r / c
    pm, p = _monic_eval(a, b, rs, n)
    if p == 0.0:
        return None
    diag = np.concatenate([a[:n], [rs - b[n] * pm / p]])
    return _rule_from_jacobi(diag, b[1:n + 1], mom[0], c)


# ---------------------------------------------------------------------------
# candidate assembly
# ---------------------------------------------------------------------------

def _nnls_weights(x: np.ndarray, Mfull: np.ndarray, scale: np.ndarray):
    """Best nonnegative weights at fixed atoms; returns (w, scaled residual)."""
    V = np.array([x ** j / scale[j] for j in range(Mfull.size)])
    rhs = Mfull / scale
    try:
        w, _ = optimize.nnls(V, rhs, maxiter=max(200, 40 * x.size))
    except RuntimeError:
        w, *_ = np.linalg.lstsq(V, rhs, rcond=None)
        w = np.clip(w, 0.0, None)
    return w, float(np.max(np.abs(V @ w - rhs)))


def _far_ladder(x_top: float, cap: float, count: int = 10) -> np.ndarray:
    # moderate reach: far enough to absorb top-moment surplus at tiny
    # weight, near enough that the weight polish stays well conditioned
    hi = min(cap * 0.98, 100.0 * max(x_top, 1.0))
    lo = min(2.0 * x_top, hi / 4.0)
    return np.geomspace(lo, hi, count)


def _structured_atoms(sense: str, Mfull: np.ndarray, r, cap: float):
    """Atom sets built from canonical rules of the moment sequence.

    Yields atom location arrays ordered from the most-constrained rule
    (usually the optimum) downwards; each gets its weights from NNLS.
    Surplus in the top moments is absorbed by a far-atom ladder, which
    NNLS zeroes out whenever it is not needed.
    """
    k = Mfull.size - 1
    out = []
    if sense == "max":
        J_hi = max((k + 1) // 2, 1)
        for J in range(J_hi, 0, -1):
            rule = _gauss_rule(Mfull[:2 * J], J)
            if rule is None:
                continue
            x = rule[0][rule[1] > 0]
            x = x[x > 0]
            if x.size:
                out.append(np.concatenate([x, _far_ladder(x[-1], cap)]))
    else:
        J_hi = k // 2 + 1
        for J in range(J_hi, 0, -1):
            rule = _radau_rule(Mfull[:2 * J - 1], r, J)
            if rule is None:
                continue
            x = np.unique(np.concatenate([[r], rule[0][rule[0] >= r * (1 - 1e-12)]]))
            out.append(np.concatenate([x, _far_ladder(max(x[-1], 1.0), cap)]))
    return out


def _try_exact_recovery(Mfull: np.ndarray, scale, tol: float):
    """If the moments have a unique representing measure, return it.

    Rank deficiency of the moment sequence (recurrence breakdown) means
    some j-atom measure reproduces every moment; then the feasible set is
    a single point and both senses share the optimum.
    """
    a, b, exhausted, c = _scaled_recurrence(Mfull)
    if exhausted is None:
        return None
    x, w = _rule_from_jacobi(a[:exhausted], b[1:exhausted], Mfull[0], c)
    keep = (w > 0) & (x > 0)
    x, w = x[keep], w[keep]
    if x.size == 0:
        return None
    w, resid = _nnls_weights(x, Mfull, scale)
    if resid <= tol and w.sum() > 0.5:
        return x, w
    return None


# ---------------------------------------------------------------------------
# SLSQP refinement
# ---------------------------------------------------------------------------

def _refine(sense, Mfull, scale, x0, w0, lo, hi, pin_first, max_iter):
    na = x0.size
    k1 = Mfull.size
    sgn = -1.0 if sense == "max" else 1.0
    ulo, uhi = math.log(lo), math.log(hi)
    js = np.arange(k1)[:, None]

    def obj(z):
        return sgn * float(np.dot(z[na:], z[:na]))

    def obj_jac(z):
        return sgn * np.concatenate([z[na:], z[:na]])

    def cons(z):
        xp = np.exp(np.outer(js.ravel(), z[:na]))  # x**j rows
        return (xp @ z[na:] - Mfull) / scale

    def cons_jac(z):
        x = np.exp(z[:na])
        xp = x[None, :] ** js  # (k1, na)
        du = js * xp * z[na:][None, :]
        return np.hstack([du, xp]) / scale[:, None]

    bounds = [(ulo, ulo) if (pin_first and i == 0) else (ulo, uhi)
              for i in range(na)] + [(0.0, 1.0)] * na
    z0 = np.concatenate([np.log(np.clip(x0, lo, hi)), w0])
    with warnings.catch_warnings():
        # the bounded-SLSQP clip notice is routine, not actionable
        warnings.filterwarnings("ignore", message=".*outside bounds.*")
        res = optimize.minimize(
            obj, z0, jac=obj_jac, method="SLSQP", bounds=bounds,
            constraints=[{"type": "eq", "fun": cons, "jac": cons_jac}],
            options={"maxiter": max_iter, "ftol": 1e-12})
    x = np.exp(np.clip(res.x[:na], ulo, uhi))
    if pin_first:
        x[0] = lo
    return x, bool(res.status == 9)  # 9 = iteration limit


# ---------------------------------------------------------------------------
# main entry point
# ---------------------------------------------------------------------------

def solve(sense: str, M, r: float | None = None,
          cfg: SolveConfig = DEFAULT_CONFIG, *,
          fixed_weights=None) -> tuple[float, AtomicMeasure]:
    """Extremal ``E[log X]`` over measures matching moments ``M_1..M_k``.

    ``sense`` is "max" or "min"; the min sense requires a support floor
    ``r > 0`` and pins one atom there.  Returns ``(objective, witness)``
    where the witness reproduces the moments within ``cfg.tol_feas``
    (scaled by ``max(1, M_j)`` per moment).

    With ``fixed_weights`` the weight vector is frozen and only atom
    locations are optimized; used to cross-check closed-form bounds that
    presuppose a weight profile.
    """
    if sense not in ("max", "min"):
        raise ValueError("sense must be 'max' or 'min'")
    M = np.asarray(M, dtype=float)
    k = M.size
    if k < 1 or abs(M[0] - 1.0) > 1e-12:
        raise ValueError("need normalized moments with M_1 = 1")
    if sense == "min":
        if r is None or r <= 0:
            raise ValueError("min sense requires a floor r > 0")
        if r >= 1.0 and (k < 2 or M[1] > 1.0):
            raise InfeasibleError("floor r >= 1 is incompatible with M_1 = 1")
    Mfull = np.concatenate([[1.0], M])
    scale = np.maximum(1.0, Mfull)

    if k >= 2:
        if M[1] < 1.0 - 1e-12:
            raise InfeasibleError("M_2 < 1 violates Jensen")
        # point-mass degeneracy: M_2 = 1 forces X = 1 a.s.
        if abs(M[1] - 1.0) <= 1e-12:
            return 0.0, AtomicMeasure(np.array([1.0]), np.array([1.0]))
    if k == 1 and sense == "max":
        return 0.0, AtomicMeasure(np.array([1.0]), np.array([1.0]))

    cap = _BIG_CAP * max(M[-1] ** (1.0 / k), 1.0)
    lo = r if sense == "min" else cfg.atom_floor
    pin = sense == "min"

    if fixed_weights is not None:
        return _solve_fixed_weights(sense, Mfull, scale, np.asarray(
            fixed_weights, dtype=float), lo, cap, cfg)

    exact = _try_exact_recovery(Mfull, scale, cfg.tol_feas)
    if exact is not None:
        x, w = exact
        if sense == "min" and x[0] < r * (1 - 1e-9):
            raise InfeasibleError(
                "floor r exceeds the support of the unique representing measure")
        mu = _finalize(x, w, Mfull, scale, cfg)
        return mu.log_mean(), mu

    candidates: list[tuple[float, np.ndarray, np.ndarray]] = []

    def admit(x, w, resid):
        if resid <= cfg.tol_feas and w.sum() > 0.5:
            keep = w > 0
            val = float(np.dot(w[keep], np.log(x[keep])))
            candidates.append((val, x[keep], w[keep]))
            return True
        return False

    # structured candidates from canonical rules of the moment sequence
    structured = _structured_atoms(sense, Mfull, r, cap)
    for xs in structured:
        xs = np.clip(xs, lo, cap)
        if pin:
            xs[0] = r
        w, resid = _nnls_weights(xs, Mfull, scale)
        admit(xs, w, resid)

    # SLSQP refinement from structured + generic + random starts
    starts: list[tuple[np.ndarray, np.ndarray]] = []
    n_atoms = k + 1
    for xs in structured[:2]:
        xs = np.clip(xs[:n_atoms], lo, cap)
        if xs.size < n_atoms:
            pad = np.geomspace(max(lo, 0.3), min(cap, 3.0),
                               n_atoms - xs.size)
            xs = np.concatenate([xs, pad])
        starts.append((np.sort(xs) if not pin else xs,
                       np.full(n_atoms, 1.0 / n_atoms)))
    hi0 = max(M[-1] ** (1.0 / k), 1.5)
    starts.append((np.linspace(max(lo, 0.05), hi0, n_atoms),
                   np.full(n_atoms, 1.0 / n_atoms)))
    starts.append((np.geomspace(max(lo, 1e-3), hi0, n_atoms),
                   np.full(n_atoms, 1.0 / n_atoms)))
    n_random = max(cfg.restarts - len(starts), 0)
    for t in range(n_random):
        rng = np.random.default_rng(
            np.random.SeedSequence(cfg.seed, spawn_key=(t,)))
        xs = np.clip(np.exp(rng.normal(0.0, 1.5, n_atoms))
                     * M[-1] ** (1.0 / (2 * k)), lo, cap)
        starts.append((xs, rng.dirichlet(np.ones(n_atoms))))

    exhausted_all = True
    for x0, w0 in starts:
        x0 = x0.copy()
        if pin:
            x0[0] = r
        x, hit_limit = _refine(sense, Mfull, scale, x0, w0, lo, cap,
                               pin, cfg.max_iter)
        exhausted_all &= hit_limit
        w, resid = _nnls_weights(x, Mfull, scale)
        admit(x, w, resid)

    if not candidates:
        if exhausted_all:
            raise SolverStalledError(
                "no restart converged within the iteration budget")
        raise InfeasibleError(
            "no restart met the moment residual tolerance")

    better = max if sense == "max" else min
    best_val = better(c[0] for c in candidates)
    # ties broken by candidate order for determinism
    val, x, w = next(c for c in candidates if c[0] == best_val)
    mu = _finalize(x, w, Mfull, scale, cfg)
    return mu.log_mean(), mu


def _finalize(x, w, Mfull, scale, cfg) -> AtomicMeasure:
    """Prune negligible atoms, renormalize, and repair the mass sum."""
    keep = w >= cfg.atom_floor
    if not np.all(keep) and keep.any():
        w2, resid = _nnls_weights(x[keep], Mfull, scale)
        if resid <= cfg.tol_feas:
            x, w = x[keep], w2
    s = math.fsum(w)
    return AtomicMeasure(x, w / s)


def _solve_fixed_weights(sense, Mfull, scale, w, lo, cap, cfg):
    """Atom locations for a frozen weight profile (moment matching only)."""
    na = w.size
    k1 = Mfull.size
    js = np.arange(k1)

    def resid_vec(u):
        x = np.exp(u)
        return np.array([np.dot(w, x ** j) for j in js]) / scale - Mfull / scale

    best = None
    for t in range(cfg.restarts):
        rng = np.random.default_rng(
            np.random.SeedSequence(cfg.seed, spawn_key=(1000 + t,)))
        if t == 0:
            x0 = np.geomspace(max(lo, 0.1), max(Mfull[-1] ** (1 / (k1 - 1)), 1.5), na)
        else:
            x0 = np.clip(np.exp(rng.normal(0, 1.0, na)), lo, cap)
        sol = optimize.least_squares(resid_vec, np.log(x0),
                                     method="lm", max_nfev=2000)
        resid = float(np.max(np.abs(sol.fun)))
        if resid <= cfg.tol_feas:
            x = np.exp(sol.x)
            val = float(np.dot(w, np.log(x)))
            if best is None or (sense == "max") == (val > best[0]):
                best = (val, x)
    if best is None:
        raise InfeasibleError("fixed-weight moment system has no solution "
                              "within tolerance")
    val, x = best
    return val, AtomicMeasure(x, w)
