"""Closed forms for the builtin N-function families.

Every function takes a family code, a parameter triple ``(p, q, gamma)`` and a
nonnegative array ``t``. Unused parameters are ignored. The same formulas are
mirrored in ``kernels/_core.pyx``; keep the two in sync.
"""
import numpy as np

POWER = 0
POWER_SUM = 1
CURVATURE = 2
POWER_LOG = 3

FAMILY_NAMES = {
    POWER: "power",
    POWER_SUM: "power_sum",
    CURVATURE: "curvature",
    POWER_LOG: "power_log",
}
FAMILY_CODES = {v: k for k, v in FAMILY_NAMES.items()}


def A(code, params, t):
    p, q, g = params
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore"):
        if code == POWER:
            return t**p
        if code == POWER_SUM:
            return t**p + t**q
        if code == CURVATURE:
            return np.expm1(g * np.log1p(t * t))
        if code == POWER_LOG:
            return t**p * np.log1p(t)
    raise ValueError(f"unknown family code {code}")


def dA(code, params, t):
    """A'(t) = a(t) t."""
    p, q, g = params
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        if code == POWER:
            return p * t ** (p - 1)
        if code == POWER_SUM:
            return p * t ** (p - 1) + q * t ** (q - 1)
        if code == CURVATURE:
            return 2 * g * t * (1 + t * t) ** (g - 1)
        if code == POWER_LOG:
            return p * t ** (p - 1) * np.log1p(t) + t**p / (1 + t)
    raise ValueError(f"unknown family code {code}")


def d2A(code, params, t):
    """A''(t); ``inf`` at t = 0 when the family is singular there."""
    p, q, g = params
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if code == POWER:
            out = p * (p - 1) * t ** (p - 2)
        elif code == POWER_SUM:
            out = p * (p - 1) * t ** (p - 2) + q * (q - 1) * t ** (q - 2)
        elif code == CURVATURE:
            s = 1 + t * t
            return 2 * g * s ** (g - 2) * (s + 2 * (g - 1) * t * t)
        elif code == POWER_LOG:
            out = (p * (p - 1) * t ** (p - 2) * np.log1p(t)
                   + 2 * p * t ** (p - 1) / (1 + t)
                   - t**p / (1 + t) ** 2)
            # t^(p-2) log1p(t) ~ t^(p-1) near 0
            return np.where(t == 0, 0.0, out)
        else:
            raise ValueError(f"unknown family code {code}")
    return out


def growth_ratio(code, params, t):
    """a(t) t^2 / A(t), written to avoid cancellation for small t."""
    p, q, g = params
    t = np.asarray(t, dtype=float)
    if code == POWER:
        return np.full_like(t, p)
    if code == POWER_SUM:
        # (p t^p + q t^q)/(t^p + t^q) = (p + q s)/(1 + s), s = t^(q-p)
        with np.errstate(over="ignore"):
            s = t ** (q - p)
            return np.where(np.isinf(s), q, (p + q * s) / (1 + s))
    if code == CURVATURE:
        x = t * t
        with np.errstate(over="ignore", invalid="ignore"):
            num = 2 * g * x * np.exp((g - 1) * np.log1p(x))
            out = num / np.expm1(g * np.log1p(x))
        return np.where(np.isfinite(out), out, 2 * g)
    if code == POWER_LOG:
        return p + t / ((1 + t) * np.log1p(t))
    raise ValueError(f"unknown family code {code}")


def analytic_exponents(code, params):
    """Return (l, m, e0, einf, c0).

    ``e0``/``einf`` are the power-law exponents of A near 0 and near infinity,
    ``c0`` the leading coefficient A(t) ~ c0 t^e0 as t -> 0.
    """
    p, q, g = params
    if code == POWER:
        return p, p, p, p, 1.0
    if code == POWER_SUM:
        return p, q, p, q, 1.0
    if code == CURVATURE:
        return 2.0, 2.0 * g, 2.0, 2.0 * g, g
    if code == POWER_LOG:
        return p, p + 1.0, p + 1.0, p, 1.0
    raise ValueError(f"unknown family code {code}")
