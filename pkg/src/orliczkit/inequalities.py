"""Numerical audits of the Orlicz-space inequalities.

Every check returns a :class:`CheckReport`. Margins are relative,
``(rhs - lhs) / max(|lhs|, |rhs|)``, so a single tolerance works across the
many orders of magnitude that N-function values span.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ParameterError
from .nfunction import SobolevConjugate, conjugate_eval, xi
from .radial import (GridFunction, grid_from_nodes, luxemburg_norm, make_grid,
                     modular, radial_gradient)

__all__ = [
    "CheckReport", "StraussBound", "LionsDemoResult", "relative_margin",
    "young_check", "lemma_f0_check", "sandwich_check", "f3_ratio_check",
    "strauss_bound", "strauss_check", "embedding_conditions_check",
    "lions_vanishing_demo", "legendre_roundtrip", "random_decaying_profile",
]

DEFAULT_TOL = 1e-9
MAX_VIOLATIONS = 20


def relative_margin(lhs, rhs):
    """(rhs - lhs) / max(|lhs|, |rhs|), with 0 when both vanish and +1 when
    the right-hand side is +inf (a vacuous bound)."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.maximum(np.abs(lhs), np.abs(rhs))
        m = (rhs - lhs) / scale
    m = np.where(scale == 0, 0.0, m)
    m = np.where(np.isposinf(rhs) & np.isfinite(lhs), 1.0, m)
    return np.where(np.isnan(m), -np.inf, m)


@dataclass
class CheckReport:
    name: str
    samples: int
    worst_margin: float
    violations: list = field(default_factory=list)
    passed: bool = True
    tolerance: float = DEFAULT_TOL
    details: dict = field(default_factory=dict)

    @classmethod
    def from_margins(cls, name, inputs, lhs, rhs, tol=DEFAULT_TOL, details=None):
        """Build a report from parallel arrays of sample inputs, lhs and rhs."""
        lhs = np.atleast_1d(np.asarray(lhs, dtype=float))
        rhs = np.atleast_1d(np.asarray(rhs, dtype=float))
        margins = relative_margin(lhs, rhs)
        worst = float(margins.min()) if margins.size else math.inf
        bad = np.flatnonzero(margins < -tol)[:MAX_VIOLATIONS]
        viol = [{"input": _jsonable(inputs[i]), "lhs": float(lhs[i]), "rhs": float(rhs[i])}
                for i in bad]
        return cls(name, int(lhs.size), worst, viol, bool(worst >= -tol), tol, details or {})

    def to_dict(self):
        return {
            "name": self.name,
            "samples": self.samples,
            "worst_margin": _finite_or_str(self.worst_margin),
            "passed": self.passed,
            "tolerance": self.tolerance,
            "violations": self.violations,
            "details": {k: _jsonable(v) for k, v in self.details.items()},
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def to_text(self):
        status = "PASS" if self.passed else "FAIL"
        line = (f"[{status}] {self.name}: samples={self.samples} "
                f"worst_margin={self.worst_margin:.3e} (tol {self.tolerance:g})")
        extra = [f"    {v}" for v in self.violations[:5]]
        return "\n".join([line] + extra)

    def __bool__(self):
        return self.passed


def _finite_or_str(x):
    return float(x) if math.isfinite(x) else str(x)


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (tuple, list)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return _finite_or_str(float(x))
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _rng(seed):
    return np.random.default_rng(seed)


def _log_uniform(rng, lo, hi, n):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), n))


# ---------------------------------------------------------------- pointwise

def young_check(nf, sample_count=1000, seed=0, t_range=(1e-3, 1e3), tol=DEFAULT_TOL):
    """s t <= A(t) + A~(s) on log-uniform (s, t), with equality at s = a(t) t."""
    rng = _rng(seed)
    t = _log_uniform(rng, *t_range, sample_count)
    s = _log_uniform(rng, float(nf.dA(t_range[0])), float(nf.dA(t_range[1])), sample_count)
    t[0], s[0] = 0.0, float(s[0])
    lhs = s * t
    rhs = nf.A(t) + conjugate_eval(nf, s)
    rep = CheckReport.from_margins(f"young[{nf.name}]", list(zip(s, t)), lhs, rhs, tol)
    # equality case s = a(t) t
    te = t[1:]
    se = nf.dA(te)
    eq_err = np.abs(relative_margin(se * te, nf.A(te) + conjugate_eval(nf, se)))
    rep.details["equality_max_rel_error"] = float(eq_err.max())
    if eq_err.max() > 1e-8:
        rep.passed = False
        i = int(eq_err.argmax())
        rep.violations.append({"input": ["equality", float(se[i]), float(te[i])],
                               "lhs": float(se[i] * te[i]),
                               "rhs": float(nf.A(te[i]) + conjugate_eval(nf, se[i]))})
    return rep


def lemma_f0_check(nf, sample_count=1000, t_range=(1e-4, 1e4), tol=DEFAULT_TOL):
    """A~(a(t) t) <= A(2t) on log-spaced t (plus t = 0)."""
    t = np.concatenate([[0.0], np.logspace(math.log10(t_range[0]), math.log10(t_range[1]),
                                            sample_count - 1)])
    lhs = conjugate_eval(nf, nf.dA(t))
    rhs = nf.A(2 * t)
    return CheckReport.from_margins(f"lemma_f0[{nf.name}]", t, lhs, rhs, tol)


def sandwich_check(obj, kind="F1", sample_count=1000, seed=0, tol=DEFAULT_TOL,
                   rho_range=(1e-2, 1e2)):
    """Both sides of the growth sandwich on random (rho, t).

    ``F1``: xi0(rho) A(t) <= A(rho t) <= xi1(rho) A(t) for an N-function.
    ``F2``: the same with xi2/xi3 and the Sobolev conjugate A_* (``obj`` must
    be a SobolevConjugate; t is drawn inside its table).
    """
    rng = _rng(seed)
    rho = _log_uniform(rng, *rho_range, sample_count)
    rho[0] = 1.0
    if kind == "F1":
        t = _log_uniform(rng, 1e-3, 1e3, sample_count)
        A, lo_k, hi_k = obj.A, 0, 1
        name = f"sandwich_F1[{obj.name}]"
    elif kind == "F2":
        if not isinstance(obj, SobolevConjugate):
            raise TypeError("sandwich_check(kind='F2') needs a SobolevConjugate")
        # keep both t and rho t inside the table
        G_lo, G_hi = obj.t_range
        lo = G_lo * rho_range[1] * 10
        hi = G_hi / rho_range[1] / 10
        t = _log_uniform(rng, max(lo, 1e-6), min(hi, 1e6), sample_count)
        A, lo_k, hi_k = obj.A, 2, 3
        name = f"sandwich_F2[{obj.base.name},N={obj.N}]"
    else:
        raise ValueError("kind must be 'F1' or 'F2'")
    At = A(t)
    Art = A(rho * t)
    with np.errstate(invalid="ignore"):
        low = xi(lo_k, rho, obj) * At
        high = xi(hi_k, rho, obj) * At
    high = np.where(np.isnan(high), np.inf, high)
    inputs = list(zip(rho, t)) * 2
    rep = CheckReport.from_margins(name, inputs, np.concatenate([low, Art]),
                                   np.concatenate([Art, high]), tol)
    rep.samples = sample_count
    return rep


def f3_ratio_check(sc, sample_count=1000, seed=0, log10_s=(-40.0, 40.0), tol=DEFAULT_TOL):
    """l* <= a_*(t) t^2 / A_*(t) <= m* on t = A_*^{-1}(s), s log-uniform."""
    rng = _rng(seed)
    s = 10.0 ** rng.uniform(*log10_s, sample_count)
    t = sc.inverse(s)
    ratio = sc.ratio(t)
    lo = np.full_like(ratio, sc.l_star)
    hi = np.full_like(ratio, sc.m_star)
    inputs = list(t) * 2
    rep = CheckReport.from_margins(f"f3_ratio[{sc.base.name},N={sc.N}]", inputs,
                                   np.concatenate([lo, ratio]), np.concatenate([ratio, hi]), tol,
                                   details={"l_star": sc.l_star, "m_star": sc.m_star,
                                            "ratio_min": float(ratio.min()),
                                            "ratio_max": float(ratio.max())})
    rep.samples = sample_count
    return rep


def legendre_roundtrip(nf, t, grid_points=2001):
    """Brute-force biconjugate sup_s (s t - A~(s)) at each t.

    A coarse log-spaced scan around s = a(t) t locates the maximizer, which is
    then refined by bounded scalar minimization. Returns the array of values,
    which should reproduce A(t).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    for k, tk in enumerate(t):
        if tk == 0:
            continue
        s0 = float(nf.dA(tk))
        ls = np.linspace(math.log(s0) - 7, math.log(s0) + 7, grid_points)
        vals = np.exp(ls) * tk - conjugate_eval(nf, np.exp(ls))
        j = int(np.argmax(vals))
        a, b = ls[max(j - 1, 0)], ls[min(j + 1, grid_points - 1)]
        res = minimize_scalar(lambda x: -(math.exp(x) * tk - float(conjugate_eval(nf, math.exp(x)))),
                              bounds=(a, b), method="bounded", options={"xatol": 1e-12})
        out[k] = max(-res.fun, vals[j])
    return out


# ------------------------------------------------------------------ Strauss

@dataclass(frozen=True)
class StraussBound:
    """|v(r)| <= A^{-1}(C E / r^{N-1}) for radial v, C = (K+1)/omega_{N-1}."""

    nf: object
    N: int
    C: float
    E: float

    def bound(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            y = self.C * self.E / r ** (self.N - 1)
        out = np.full(r.shape, np.inf)
        fin = np.isfinite(y)
        out[fin] = self.nf.inverse(y[fin])
        return out


def strauss_bound(nf, u):
    E = modular(nf, u) + modular(nf, abs(radial_gradient(u)))
    if not math.isfinite(E):
        raise FloatingPointError("Strauss energy E is not finite")
    return StraussBound(nf, u.grid.N, (nf.K + 1) / u.grid.surface_area, E)


def strauss_check(nf, u, r_min=0.5, tol=DEFAULT_TOL):
    """|u(r_i)| <= A^{-1}(C E / r_i^{N-1}) at every node r_i >= r_min."""
    sb = strauss_bound(nf, u)
    sel = u.grid.nodes >= r_min
    r = u.grid.nodes[sel]
    lhs = np.abs(u.values[sel])
    rhs = sb.bound(r)
    rep = CheckReport.from_margins(f"strauss[{nf.name},N={u.grid.N}]", r, lhs, rhs, tol,
                                   details={"C": sb.C, "E": sb.E, "r_min": r_min})
    return rep


def random_decaying_profile(grid, rng, bumps=3):
    """Smooth radial profile: a random positive combination of Gaussians,
    possibly multiplied by a slowly varying cosine (so not monotone)."""
    r = grid.nodes
    v = np.zeros_like(r)
    for _ in range(bumps):
        amp = rng.uniform(0.2, 3.0)
        width = rng.uniform(0.4, 2.5)
        v += amp * np.exp(-(r / width) ** 2)
    if rng.random() < 0.5:
        v *= np.cos(rng.uniform(0, 1.5) * r)
    return GridFunction(grid, v)


# ---------------------------------------------------------------- embedding

def _trend_report(name, ratios, factor=1e-3, slack=1e-12):
    ratios = np.asarray(ratios, dtype=float)
    monotone = bool(np.all(np.diff(ratios) <= slack * np.abs(ratios[:-1])))
    drop = ratios[-1] / ratios[0] if ratios[0] > 0 else math.inf
    margin = 1.0 - drop / factor
    return monotone, drop, margin


def embedding_conditions_check(B, A, sc, decades=4, points=81, factor=1e-3):
    """B/A -> 0 at 0 and B/A_* -> 0 at infinity, operationalized as
    monotone decrease with last/first < ``factor`` over ``decades`` decades."""
    t0 = np.logspace(0, -decades, points)
    r0 = B.A(t0) / A.A(t0)
    tinf = np.logspace(0, decades, points)
    rinf = B.A(tinf) / sc.A(tinf)
    mono0, drop0, marg0 = _trend_report("B1", r0, factor)
    monoi, dropi, margi = _trend_report("B2", rinf, factor)
    ok0 = mono0 and drop0 < factor
    oki = monoi and dropi < factor
    worst = min(marg0 if mono0 else -1.0, margi if monoi else -1.0)
    details = {"B1_monotone": mono0, "B1_drop": drop0, "B1_passed": ok0,
               "B2_monotone": monoi, "B2_drop": dropi, "B2_passed": oki}
    return CheckReport(f"embedding[{B.name}/{A.name},N={sc.N}]", 2 * points, float(worst),
                       [] if ok0 and oki else [{"input": k, "lhs": None, "rhs": None}
                                               for k, ok in (("B1", ok0), ("B2", oki)) if not ok],
                       bool(ok0 and oki), 0.0, details)


# -------------------------------------------------------------------- Lions

LIONS_COLUMNS = ("n", "window", "modular_A", "norm_B", "sobolev_modular")


@dataclass
class LionsDemoResult:
    rows: list
    passed: bool
    window_drop: float
    norm_drop: float
    sobolev_drift: float

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LIONS_COLUMNS)
        for row in self.rows:
            w.writerow([row["n"]] + [f"{row[c]:.17g}" for c in LIONS_COLUMNS[1:]])
        return buf.getvalue()

    def to_dict(self):
        return {"rows": self.rows, "passed": self.passed, "window_drop": self.window_drop,
                "norm_drop": self.norm_drop, "sobolev_drift": self.sobolev_drift}


def lions_vanishing_demo(A, B, phi, beta, n_list=(1, 2, 4, 8, 16, 32), R=1.0,
                         min_drop=10.0, max_drift=0.05, window_cells=2000):
    """Spreading sequence u_n(x) = n^{-beta} phi(x / n).

    u_n lives on the stretched grid n r_i with exact nodal values. The window
    column is the integral of A(|u_n|) over the ball of radius R about the
    origin, which maximizes the window integral for radially nonincreasing
    integrands. Passes iff the window column and ||u_n||_B decrease
    monotonically by at least ``min_drop`` while the Sobolev modular
    int A(|u_n|) + int A(|grad u_n|) stays within ``max_drift`` of its first
    value.
    """
    v = np.abs(phi.values)
    if np.any(np.diff(v) > 1e-14 * max(v.max(), 1e-300)):
        raise ParameterError("phi radially nonincreasing")
    grid = phi.grid
    window_grid = make_grid(grid.N, R, window_cells, rule=grid.rule
                            if grid.rule != "simpson" else "finite_volume")
    rows = []
    for n in n_list:
        g_n = grid_from_nodes(grid.nodes * n, grid.N, grid.rule)
        u_n = GridFunction(g_n, n ** (-beta) * phi.values)
        w_vals = n ** (-beta) * np.interp(window_grid.nodes / n, grid.nodes, phi.values)
        window = modular(A, GridFunction(window_grid, w_vals))
        modA = modular(A, u_n)
        sob = modA + modular(A, abs(radial_gradient(u_n)))
        rows.append({"n": int(n), "window": window, "modular_A": modA,
                     "norm_B": luxemburg_norm(B, u_n), "sobolev_modular": sob})
    win = np.array([r["window"] for r in rows])
    nb = np.array([r["norm_B"] for r in rows])
    sob = np.array([r["sobolev_modular"] for r in rows])
    window_drop = win[0] / win[-1]
    norm_drop = nb[0] / nb[-1]
    drift = float(np.max(np.abs(sob / sob[0] - 1)))
    passed = bool(np.all(np.diff(win) < 0) and np.all(np.diff(nb) < 0)
                  and window_drop >= min_drop and norm_drop >= min_drop and drift <= max_drift)
    return LionsDemoResult(rows, passed, float(window_drop), float(norm_drop), drift)
