"""N-functions of the four builtin families and their derived functions.

An N-function ``A(t) = int_0^|t| a(s) s ds`` is represented by :class:`NFunction`.
From it we derive the complementary function (Legendre transform) and the
Sobolev conjugate ``A_*``, whose inverse is

    G(t) = int_0^t A^{-1}(s) / s^((N+1)/N) ds.

All evaluation methods are vectorized over numpy arrays and pure.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import _families as fam
from .errors import ConsistencyError, DivergenceError, ParameterError, SaturationError

__all__ = [
    "NFunctionSpec", "NFunction", "ConjugateFunction", "SobolevConjugate",
    "FlaggedValue", "build", "growth_exponents", "delta2_bound",
    "conjugate_eval", "inverse_A", "sobolev_conjugate", "a_star_eval", "xi",
    "dimension_violations", "solve_increasing",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class NFunctionSpec:
    """Family name plus parameters. ``dim`` is optional; when set, ``build``
    also enforces the dimension-dependent ranges of the family."""

    family: str
    p: float | None = None
    q: float | None = None
    gamma: float | None = None
    dim: int | None = None

    @classmethod
    def from_dict(cls, d):
        known = {"family", "p", "q", "gamma", "dim"}
        unknown = set(d) - known
        if unknown:
            raise ParameterError("known fields", f"unknown NFunctionSpec fields: {sorted(unknown)}")
        if "family" not in d:
            raise ParameterError("family", "NFunctionSpec needs a 'family'")
        return cls(**d)

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}

    def with_dim(self, dim):
        return NFunctionSpec(self.family, self.p, self.q, self.gamma, dim)


def _family_params(spec):
    fam_name = spec.family
    if fam_name not in fam.FAMILY_CODES:
        raise ParameterError("family", f"unknown family {fam_name!r}; "
                             f"expected one of {sorted(fam.FAMILY_CODES)}")
    code = fam.FAMILY_CODES[fam_name]
    need = {fam.POWER: ("p",), fam.POWER_SUM: ("p", "q"),
            fam.CURVATURE: ("gamma",), fam.POWER_LOG: ("p",)}[code]
    for name in need:
        if getattr(spec, name) is None:
            raise ParameterError(name, f"family {fam_name!r} needs parameter {name!r}")
    p = float(spec.p) if spec.p is not None else 0.0
    q = float(spec.q) if spec.q is not None else 0.0
    g = float(spec.gamma) if spec.gamma is not None else 0.0
    return code, (p, q, g)


def _intrinsic_violations(code, params):
    p, q, g = params
    out = []
    if code in (fam.POWER, fam.POWER_SUM, fam.POWER_LOG) and not p > 1:
        out.append("1 < p")
    if code == fam.POWER_SUM and not q > p:
        out.append("p < q")
    if code == fam.CURVATURE and not g > 1:
        out.append("1 < gamma")
    return out


def dimension_violations(spec, N):
    """Names of the dimension-dependent family constraints that fail for ``N``."""
    code, (p, q, g) = _family_params(spec)
    out = []
    if code == fam.POWER and not p < N:
        out.append("p < N")
    elif code == fam.POWER_SUM:
        if not q < N:
            out.append("q < N")
        if p < N and not q < p * N / (N - p):
            out.append("q < pN/(N-p)")
    elif code == fam.CURVATURE and N > 2 and not g < N / (N - 2):
        out.append("gamma < N/(N-2)")
    elif code == fam.POWER_LOG:
        p0 = (-1 + math.sqrt(1 + 4 * N)) / 2
        if not p > p0:
            out.append(f"p0 < p with p0 = {p0:.6g}")
        if not p < N - 1:
            out.append("p < N-1")
    return out


def solve_increasing(f, y, fprime=None, rtol=1e-10, max_log=700.0):
    """Solve ``f(t) = y`` for t >= 0 where f is increasing with f(0) = 0.

    Works on arrays. The bracket is found by geometric expansion in log t,
    narrowed by bisection, then finished with Newton steps that fall back to
    bisection when they leave the bracket.
    """
    y = np.asarray(y, dtype=float)
    if np.any(y < 0) or np.any(np.isnan(y)):
        raise ValueError("targets must be nonnegative")
    out = np.zeros_like(y)
    pos = y > 0
    if not pos.any():
        return out
    yt = y[pos]
    lo = np.zeros_like(yt)
    hi = np.zeros_like(yt)
    while True:
        bad = f(np.exp(lo)) > yt
        if not bad.any():
            break
        lo[bad] -= 4.0
        if lo.min() < -max_log:
            raise SaturationError("lower bracket passed exp(-%g)" % max_log)
    while True:
        with np.errstate(over="ignore"):
            bad = f(np.exp(hi)) < yt
        if not bad.any():
            break
        hi[bad] += 4.0
        if hi.max() > max_log:
            raise SaturationError(
                f"upper bracket passed exp({max_log:g}); largest target {yt.max():.3e}")
    width = 1e-4 if fprime is not None else 1e-15
    while (hi - lo).max() > width:
        mid = 0.5 * (lo + hi)
        below = f(np.exp(mid)) < yt
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    t = np.exp(0.5 * (lo + hi))
    if fprime is not None:
        for _ in range(60):
            r = f(t) - yt
            lo = np.where(r < 0, np.log(t), lo)
            hi = np.where(r > 0, np.log(t), hi)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = r / fprime(t)
                tn = t - step
            bad = ~np.isfinite(tn) | (tn <= np.exp(lo)) | (tn >= np.exp(hi))
            tn = np.where(bad, np.exp(0.5 * (lo + hi)), tn)
            done = np.abs(tn - t) <= rtol * 1e-3 * t
            t = tn
            if done.all():
                break
    out[pos] = t
    return out


class NFunction:
    """N-function with density ``a``, growth exponents (l, m) and Delta2 constant K."""

    def __init__(self, spec, code, params):
        self.spec = spec
        self.code = code
        self.params = params
        l, m, e0, einf, c0 = fam.analytic_exponents(code, params)
        self.l = float(l)
        self.m = float(m)
        self.exponent_at_zero = float(e0)
        self.exponent_at_infinity = float(einf)
        self.leading_coefficient = float(c0)
        self.K = delta2_bound(self)

    def __repr__(self):
        return f"NFunction({self.spec.to_dict()}, l={self.l}, m={self.m}, K={self.K})"

    @property
    def name(self):
        return fam.FAMILY_NAMES[self.code]

    def A(self, t):
        return fam.A(self.code, self.params, np.abs(t))

    def dA(self, t):
        """a(t) t for t >= 0."""
        return fam.dA(self.code, self.params, np.asarray(t, dtype=float))

    def d2A(self, t):
        return fam.d2A(self.code, self.params, np.asarray(t, dtype=float))

    def a(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.dA(t) / t
        # a(0+) = A''(0) by l'Hopital
        return np.where(t == 0, self.d2A(np.zeros_like(t)), out)

    def ratio(self, t):
        """Closed form of a(t) t^2 / A(t)."""
        return fam.growth_ratio(self.code, self.params, np.abs(np.asarray(t, dtype=float)))

    def inverse(self, y, rtol=1e-10):
        return inverse_A(self, y, rtol=rtol)

    def conjugate(self):
        return ConjugateFunction(self)

    def xi0(self, rho):
        return xi(0, rho, self)

    def xi1(self, rho):
        return xi(1, rho, self)


def build(spec: NFunctionSpec) -> NFunction:
    """Construct the N-function for ``spec``; raises ParameterError naming the
    violated constraint."""
    code, params = _family_params(spec)
    bad = _intrinsic_violations(code, params)
    if spec.dim is not None:
        if spec.dim < 2:
            bad.append("N >= 2")
        else:
            bad += dimension_violations(spec, spec.dim)
    if bad:
        raise ParameterError(bad[0], f"{spec.family}: constraint violated: {', '.join(bad)}")
    return NFunction(spec, code, params)


def growth_exponents(nf, t=None):
    """Estimate (l, m) as inf/sup of a(t) t^2 / A(t) over the sample set ``t``."""
    if t is None:
        t = np.logspace(-6, 6, 1201)
    t = np.asarray(t, dtype=float)
    t = t[t > 0]
    At = nf.A(t)
    if np.any(At <= 0):
        raise ParameterError("A(t) > 0 for t > 0", "invalid N-function: A vanishes at a sampled t > 0")
    r = t * nf.dA(t) / At
    return float(r.min()), float(r.max())


def delta2_bound(nf):
    """K = xi_1(2) = 2^m, so that A(2t) <= K A(t) for all t >= 0."""
    return 2.0 ** nf.m


def inverse_A(nf, y, rtol=1e-10):
    """Inverse of A restricted to [0, inf)."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("inverse_A: domain error, y must be >= 0")
    return solve_increasing(nf.A, y, nf.dA, rtol=rtol)


def _conjugate_argmax(nf, s, rtol=1e-10):
    return solve_increasing(nf.dA, s, nf.d2A, rtol=rtol)


def conjugate_eval(nf, s, rtol=1e-10):
    """Complementary function max_{t>=0} (s t - A(t)), via the root of a(t) t = s."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("conjugate_eval: s must be >= 0")
    t = _conjugate_argmax(nf, s, rtol=rtol)
    return s * t - nf.A(t)


class ConjugateFunction:
    """Complementary N-function of ``base``; usable wherever an N-function's
    ``A``, ``l`` and ``m`` are needed (modulars, Luxemburg norms)."""

    def __init__(self, base):
        self.base = base
        # standard exponent duality for complementary functions
        self.l = base.m / (base.m - 1)
        self.m = base.l / (base.l - 1)

    def A(self, s):
        return conjugate_eval(self.base, np.abs(s))

    def dA(self, s):
        return _conjugate_argmax(self.base, np.asarray(s, dtype=float))


class FlaggedValue(NamedTuple):
    value: np.ndarray
    extrapolated: np.ndarray


class SobolevConjugate:
    """Tabulated Sobolev conjugate ``A_*`` of ``base`` in dimension ``N``.

    The table holds G = A_*^{-1} on log-spaced A-values ``s``. A_* is read off
    by monotone (PCHIP) interpolation of log s against log G, then polished by
    Newton steps on the exact integral. Outside the table a power law (or, in
    the borderline case where A grows like t^N, a logarithmic law for G) is
    used and flagged.
    """

    def __init__(self, base, N, s_range=(-60.0, 60.0), per_decade=20):
        e0 = base.exponent_at_zero
        einf = base.exponent_at_infinity
        if not e0 < N:
            raise DivergenceError(
                f"int_0 A^-1(s)/s^((N+1)/N) ds diverges: A(t) ~ t^{e0:g} near 0 and N = {N}")
        if einf > N:
            raise DivergenceError(
                f"int_1^inf A^-1(s)/s^((N+1)/N) ds converges: A(t) ~ t^{einf:g} at infinity "
                f"and N = {N}; A_* is not an N-function")
        self.base = base
        self.N = int(N)
        self.l_star = base.l * N / (N - base.l) if base.l < N else math.inf
        self.m_star = base.m * N / (N - base.m) if base.m < N else math.inf
        self.critical = einf == N
        self._alpha0 = 1.0 / e0 - 1.0 / N
        self._alpha_inf = 1.0 / einf - 1.0 / N

        n = int(round((s_range[1] - s_range[0]) * per_decade)) + 1
        x = np.linspace(s_range[0], s_range[1], n) * math.log(10.0)
        c0 = base.leading_coefficient
        G0 = c0 ** (-1.0 / e0) * math.exp(self._alpha0 * x[0]) / self._alpha0
        G = np.empty(n)
        G[0] = G0
        G[1:] = G0 + np.cumsum(self._segment_integrals(x[:-1], x[1:]))
        if not np.all(np.diff(G) > 0):
            raise ConsistencyError("Sobolev-conjugate table is not strictly increasing")
        self.log_s = x
        self.G_table = G
        self._log_G = np.log(G)
        self._interp = PchipInterpolator(self._log_G, x, extrapolate=False)

    def _integrand_log(self, x):
        # d/dx G(e^x) = A^{-1}(e^x) e^{-x/N}
        return self.base.inverse(np.exp(x)) * np.exp(-x / self.N)

    def _segment_integrals(self, xa, xb):
        xa = np.asarray(xa, dtype=float)
        xb = np.asarray(xb, dtype=float)
        half = 0.5 * (xb - xa)
        pts = (0.5 * (xa + xb))[..., None] + half[..., None] * _GL_NODES
        vals = self._integrand_log(pts.ravel()).reshape(pts.shape)
        return half * (vals @ _GL_WEIGHTS)

    @property
    def t_range(self):
        return float(self.G_table[0]), float(self.G_table[-1])

    def inverse(self, s):
        """G(s) = A_*^{-1}(s) for s >= 0."""
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        pos = s > 0
        x = np.log(s[pos])
        out[pos] = self._G_of_log(x)
        return out

    def _G_of_log(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        xt = self.log_s
        below = x < xt[0]
        above = x > xt[-1]
        inside = ~(below | above)
        if below.any():
            out[below] = self.G_table[0] * np.exp(self._alpha0 * (x[below] - xt[0]))
        for k in np.flatnonzero(above):
            edges = np.linspace(xt[-1], x[k], int(np.ceil((x[k] - xt[-1]) / 0.1)) + 1)
            out[k] = self.G_table[-1] + self._segment_integrals(edges[:-1], edges[1:]).sum()
        if inside.any():
            j = np.clip(np.searchsorted(xt, x[inside], side="right") - 1, 0, len(xt) - 1)
            out[inside] = self.G_table[j] + self._segment_integrals(xt[j], x[inside])
        return out

    def evaluate(self, t, polish=True):
        """A_*(t) with a flag marking values obtained by extrapolation."""
        t = np.abs(np.asarray(t, dtype=float))
        val = np.zeros_like(t)
        flag = np.zeros(t.shape, dtype=bool)
        pos = t > 0
        tp = t[pos]
        G_lo, G_hi = self.t_range
        x = np.empty_like(tp)
        below = tp < G_lo
        above = tp > G_hi
        inside = ~(below | above)
        xt = self.log_s
        x[below] = xt[0] + np.log(tp[below] / G_lo) / self._alpha0
        if above.any():
            if self.critical:
                slope = self._integrand_log(np.array([xt[-1]]))[0]
                x[above] = xt[-1] + (tp[above] - G_hi) / slope
            else:
                x[above] = xt[-1] + np.log(tp[above] / G_hi) / self._alpha_inf
        if inside.any():
            x[inside] = self._interp(np.log(tp[inside]))
            if polish:
                xi_ = x[inside]
                for _ in range(2):
                    r = self._G_of_log(xi_) - tp[inside]
                    xi_ = xi_ - r / self._integrand_log(xi_)
                x[inside] = xi_
        with np.errstate(over="ignore"):
            val[pos] = np.exp(x)
        flag[pos] = ~inside
        return FlaggedValue(val, flag)

    def A(self, t):
        return self.evaluate(t).value

    def dA(self, t):
        """a_*(t) t = A_*(t)^((N+1)/N) / A^{-1}(A_*(t))."""
        return a_star_eval(self, t).value

    def ratio(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        return t * self.dA(t) / self.A(t)

    @property
    def l(self):
        return self.l_star

    @property
    def m(self):
        return self.m_star


def sobolev_conjugate(nf, N, **table_opts):
    """Tabulate the Sobolev conjugate of ``nf`` in dimension ``N``."""
    if N < 2:
        raise ParameterError("N >= 2")
    return SobolevConjugate(nf, N, **table_opts)


def a_star_eval(sc, t):
    """(A_*)'(t) = a_*(t) t, flagged where A_* came from extrapolation."""
    t = np.abs(np.asarray(t, dtype=float))
    A_t, flag = sc.evaluate(t)
    out = np.zeros_like(A_t)
    pos = A_t > 0
    s = A_t[pos]
    with np.errstate(over="ignore", invalid="ignore"):
        out[pos] = s ** ((sc.N + 1) / sc.N) / sc.base.inverse(s)
    return FlaggedValue(out, flag)


def xi(kind, rho, obj):
    """Sandwich functions: xi0 = min(rho^l, rho^m), xi1 = max(...), and xi2/xi3
    the same with (l*, m*) of a SobolevConjugate."""
    rho = np.asarray(rho, dtype=float)
    if kind in (0, 1):
        lo, hi = obj.l, obj.m
    elif kind in (2, 3):
        if not isinstance(obj, SobolevConjugate):
            raise TypeError("xi2/xi3 need a SobolevConjugate")
        lo, hi = obj.l_star, obj.m_star
    else:
        raise ValueError(f"xi kind must be 0..3, got {kind}")
    with np.errstate(over="ignore"):
        a, b = rho**lo, rho**hi
    return np.minimum(a, b) if kind in (0, 2) else np.maximum(a, b)
