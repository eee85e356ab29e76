"""Radial functions on R^N: grids, modulars, Luxemburg and Orlicz-Sobolev norms.

A radial function is stored by its nodal values on ``0 = r_0 < ... < r_M = R_max``
and is taken to vanish for r > R_max. Integrals over R^N reduce to
``omega_{N-1} int_0^R g(r) r^{N-1} dr``, approximated by nodal weights.

Quadrature rules
----------------
finite_volume
    Default. Node i carries the measure of its dual cell
    ``[r_{i-1/2}, r_{i+1/2}]``; second order, strictly positive weights
    (including r = 0) and consistent with the cell-flux form of the energy.
trapezoid
    Product trapezoid rule (hat-function weights): exact for piecewise-linear g.
simpson
    Composite Simpson on ``g(r) r^{N-1}``; uniform spacing and even M only.
    Fourth order, but its weight at r = 0 vanishes, so the solver rejects it.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "RadialGrid", "GridFunction", "PotentialSpec", "make_grid", "grid_from_nodes",
    "modular", "radial_gradient", "luxemburg_norm", "sobolev_norm",
    "holder_pairing", "modular_convergence_check", "modular_distances",
    "read_csv", "write_csv", "sphere_area", "luxemburg_from_weights",
]

RULES = ("finite_volume", "trapezoid", "simpson")


def sphere_area(N):
    """omega_{N-1} = 2 pi^{N/2} / Gamma(N/2), the area of the unit sphere in R^N."""
    return 2 * math.pi ** (N / 2) / math.gamma(N / 2)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    N: int
    R_max: float
    nodes: np.ndarray
    weights: np.ndarray
    rule: str
    surface_area: float
    cell_widths: np.ndarray = field(repr=False)
    cell_measures: np.ndarray = field(repr=False)

    @property
    def M(self):
        return len(self.nodes) - 1

    def integrate(self, g):
        """omega * sum_i w_i g_i, the R^N integral of a radial g."""
        return self.surface_area * float(np.dot(self.weights, g))

    def scaled(self, factor):
        """The same grid stretched by ``factor`` (nodes r -> factor * r)."""
        return grid_from_nodes(self.nodes * factor, self.N, self.rule)

    def restricted(self, R, M=None):
        """A grid of the same rule on [0, R] with ``M`` cells (default: keep spacing)."""
        if M is None:
            M = max(16, int(np.ceil(R / np.max(self.cell_widths))))
        spacing = "uniform" if np.allclose(self.cell_widths, self.cell_widths[0]) else "graded"
        return make_grid(self.N, R, M, spacing=spacing, rule=self.rule)


def _weights(r, N, rule):
    if rule == "finite_volume":
        mids = np.concatenate([[0.0], 0.5 * (r[1:] + r[:-1]), [r[-1]]])
        return (mids[1:] ** N - mids[:-1] ** N) / N
    if rule == "trapezoid":
        a, b = r[:-1], r[1:]
        h = b - a
        I0 = (b**N - a**N) / N
        I1 = (b ** (N + 1) - a ** (N + 1)) / (N + 1)
        w = np.zeros_like(r)
        w[:-1] += (b * I0 - I1) / h
        w[1:] += (I1 - a * I0) / h
        return w
    if rule == "simpson":
        h = np.diff(r)
        M = len(r) - 1
        if M % 2 or not np.allclose(h, h[0], rtol=1e-9):
            raise ValueError("simpson rule needs uniform spacing and an even number of cells")
        c = np.ones(M + 1)
        c[1:-1:2] = 4.0
        c[2:-1:2] = 2.0
        return h[0] / 3 * c * r ** (N - 1)
    raise ValueError(f"unknown quadrature rule {rule!r}; expected one of {RULES}")


def grid_from_nodes(nodes, N, rule="finite_volume"):
    r = np.asarray(nodes, dtype=float).copy()
    if N < 2:
        raise ValueError("N must be >= 2")
    if len(r) < 3 or r[0] != 0.0 or np.any(np.diff(r) <= 0):
        raise ValueError("nodes must start at 0 and be strictly increasing")
    w = _weights(r, N, rule)
    h = np.diff(r)
    # cell measure by the midpoint rule: keeps the flux stencil exact on quadratics
    mu = (0.5 * (r[1:] + r[:-1])) ** (N - 1) * h
    for a in (r, w, h, mu):
        a.setflags(write=False)
    return RadialGrid(N, float(r[-1]), r, w, rule, sphere_area(N), h, mu)


def make_grid(N, R_max, M, spacing="uniform", rule="finite_volume", grading=2.0):
    """Radial grid on [0, R_max] with M cells.

    ``graded`` spacing uses r_i = R_max (i/M)^grading, clustering nodes near 0.
    """
    if N < 2 or int(N) != N:
        raise ValueError("N must be an integer >= 2")
    if not R_max > 0:
        raise ValueError("R_max must be positive")
    if M < 16:
        raise ValueError("M must be >= 16")
    x = np.linspace(0.0, 1.0, int(M) + 1)
    if spacing == "uniform":
        r = R_max * x
    elif spacing == "graded":
        r = R_max * x**grading
    else:
        raise ValueError(f"unknown spacing {spacing!r}")
    return grid_from_nodes(r, int(N), rule)


class GridFunction:
    """Nodal values of a radial function on a :class:`RadialGrid` (read-only)."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        v = np.array(values, dtype=float)
        if v.shape != grid.nodes.shape:
            raise ValueError(f"expected {grid.nodes.shape[0]} values, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("GridFunction values must be finite")
        v.setflags(write=False)
        self.grid = grid
        self.values = v

    @classmethod
    def from_callable(cls, grid, func):
        return cls(grid, func(grid.nodes))

    @property
    def r(self):
        return self.grid.nodes

    def __add__(self, other):
        return GridFunction(self.grid, self.values + _vals(other))

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - _vals(other))

    def __mul__(self, c):
        return GridFunction(self.grid, self.values * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return GridFunction(self.grid, self.values / c)

    def __abs__(self):
        return GridFunction(self.grid, np.abs(self.values))

    def __repr__(self):
        return f"GridFunction(N={self.grid.N}, M={self.grid.M}, max|u|={np.abs(self.values).max():.4g})"


def _vals(u):
    return u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=float)


@dataclass(frozen=True)
class PotentialSpec:
    """A radial potential V(r) with inf V > 0.

    kind: ``constant`` (uses ``value``), ``table`` (nodal ``values``) or
    ``formula`` (``formula`` id with ``params``). Formulas:
    ``gaussian_well``: V = v_inf - (v_inf - v0) exp(-(r/width)^2);
    ``quadratic``: V = v0 + k r^2.
    """

    kind: str = "constant"
    value: float = 1.0
    values: tuple | None = None
    formula: str | None = None
    params: dict | None = None

    @classmethod
    def constant(cls, c):
        return cls("constant", float(c))

    def on(self, grid):
        if self.kind == "constant":
            V = np.full(grid.nodes.shape, float(self.value))
        elif self.kind == "table":
            V = np.asarray(self.values, dtype=float)
            if V.shape != grid.nodes.shape:
                raise ValueError("potential table does not match the grid")
        elif self.kind == "formula":
            prm = dict(self.params or {})
            r = grid.nodes
            if self.formula == "gaussian_well":
                v0, vinf, width = prm["v0"], prm["v_inf"], prm.get("width", 1.0)
                V = vinf - (vinf - v0) * np.exp(-(r / width) ** 2)
            elif self.formula == "quadratic":
                V = prm["v0"] + prm["k"] * r**2
            else:
                raise ValueError(f"unknown potential formula {self.formula!r}")
        else:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if not V.min() > 0:
            raise ValueError(f"potential must satisfy inf V > 0 (got V0 = {V.min():.6g})")
        return V

    def V0(self, grid):
        return float(self.on(grid).min())


def _weight_values(u, weight):
    if weight is None:
        return None
    if isinstance(weight, PotentialSpec):
        return weight.on(u.grid)
    return np.asarray(weight, dtype=float)


def modular(nf, u, weight=None):
    """int_{R^N} V(x) A(|u|) dx on the grid (V = 1 when ``weight`` is None)."""
    A_u = nf.A(np.abs(u.values))
    V = _weight_values(u, weight)
    if V is not None:
        A_u = V * A_u
    return u.grid.integrate(A_u)


def radial_gradient(u):
    """u'(r) at the nodes: central differences inside, one-sided second order at
    r = R_max, and u'(0) = 0."""
    if len(u.values) < 3:
        raise ValueError("radial_gradient needs at least 3 nodes")
    du = np.gradient(u.values, u.grid.nodes, edge_order=2)
    du[0] = 0.0
    return GridFunction(u.grid, du)


def luxemburg_from_weights(A, l, m, values, weights, rtol=1e-10):
    """inf{alpha > 0 : sum_i weights_i A(|values_i| / alpha) <= 1}.

    The root of the decreasing map alpha -> modular(u / alpha) - 1 is bracketed
    with the sandwich xi0(|u|) <= modular(u) <= xi1(|u|) and found by Brent's
    method in log alpha.
    """
    v = np.abs(np.asarray(values, dtype=float))
    weights = np.asarray(weights, dtype=float)
    nz = (v > 0) & (weights > 0)
    if not nz.any():
        return 0.0
    v, weights = v[nz], weights[nz]
    # the norm is absolutely homogeneous: work with max|u| = 1 so the
    # modular neither underflows nor overflows at alpha = 1
    vmax = float(v.max())
    v = v / vmax

    def excess(log_alpha):
        return float(np.dot(weights, A(v / math.exp(log_alpha)))) - 1.0

    m0 = excess(0.0) + 1.0
    if not math.isfinite(m0):
        raise FloatingPointError("modular is not finite")
    cands = [m0 ** (1 / l), m0 ** (1 / m) if math.isfinite(m) else 1.0]
    lo, hi = math.log(min(cands)), math.log(max(cands))
    if hi - lo < 1e-15:
        return vmax * math.exp(0.5 * (lo + hi))
    # quadrature cannot break the sandwich, but rounding can; widen until bracketed
    lo, hi = lo - 1e-12, hi + 1e-12
    while excess(lo) < 0:
        lo -= 1.0
    while excess(hi) > 0:
        hi += 1.0
    x = brentq(excess, lo, hi, xtol=1e-15, rtol=rtol * 1e-2, maxiter=200)
    return vmax * math.exp(x)


def luxemburg_norm(nf, u, weight=None, rtol=1e-10):
    """Luxemburg norm of u for the N-function ``nf`` (optionally V-weighted)."""
    w = u.grid.surface_area * u.grid.weights
    V = _weight_values(u, weight)
    if V is not None:
        w = w * V
    return luxemburg_from_weights(nf.A, nf.l, nf.m, u.values, w, rtol=rtol)


def sobolev_norm(nf, u, V=None):
    """||grad u||_A + ||u||_{V,A}."""
    return luxemburg_norm(nf, abs(radial_gradient(u))) + luxemburg_norm(nf, u, V)


def holder_pairing(nf, u, v):
    """Return (int u v, 2 ||u||_A ||v||_{A~}) for auditing the Holder inequality."""
    if u.grid is not v.grid:
        raise ValueError("u and v must live on the same grid")
    pairing = u.grid.integrate(u.values * v.values)
    nu = luxemburg_norm(nf, u)
    if nu == 0.0 or not np.any(v.values):
        return pairing, 0.0
    nv = luxemburg_norm(nf.conjugate(), v)
    return pairing, 2.0 * nu * nv


def modular_distances(nf, sequence, u):
    return np.array([modular(nf, un - u) for un in sequence])


def modular_convergence_check(nf, sequence, u, tol=1e-8, slack=1e-12):
    """True iff modular(u_n - u) is nonincreasing along the sequence and ends
    below ``tol``."""
    d = modular_distances(nf, sequence, u)
    if len(d) == 0:
        raise ValueError("empty sequence")
    monotone = np.all(np.diff(d) <= slack * np.maximum(1.0, d[:-1]))
    return bool(monotone and d[-1] <= tol)


def write_csv(u, path):
    """Write ``r,value`` rows with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "value"])
        for r, v in zip(u.grid.nodes, u.values):
            w.writerow([f"{r:.17g}", f"{v:.17g}"])


def read_csv(path, N, rule="finite_volume"):
    """Read a ``r,value`` CSV back into a GridFunction on the same nodes."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["r", "value"]:
        raise ValueError(f"{path}: expected header 'r,value'")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    grid = grid_from_nodes(data[:, 0], N, rule)
    return GridFunction(grid, data[:, 1])
