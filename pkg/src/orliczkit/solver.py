"""Radial mountain-pass solver for -div(a(|grad u|) grad u) + V a(|u|) u = f(u).

The discrete energy on a :class:`~orliczkit.radial.RadialGrid` is

    J(u) = omega [ sum_k mu_k A(|d_k|) + sum_i w_i V_i A(|u_i|) - sum_i w_i F(u_i) ]

with cell slopes ``d_k = (u_{k+1} - u_k) / h_k``, midpoint cell measures ``mu_k``
and nodal quadrature weights ``w_i``; ``u_M = 0`` at ``r = R_max``. The
gradient is the exact derivative of this sum, so every descent direction is a
descent direction of the discrete landscape.

The mountain-pass level is approximated by path deformation: a polygonal path
0 -> pivot -> e is scanned, its highest point is pushed down along a
preconditioned gradient with Armijo backtracking and re-maximized along its
ray, and the path is rebuilt through the new pivot. Close to the saddle a
Newton polish (tridiagonal Hessian) finishes the job.
"""
from __future__ import annotations

import csv
import json
import math
import time
import warnings
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_banded, solveh_banded
from scipy.optimize import brentq

from . import kernels as _kernels
from .errors import GeometryError, OracleError, ParameterError
from .inequalities import CheckReport, relative_margin
from .nfunction import sobolev_conjugate
from .radial import (GridFunction, PotentialSpec, luxemburg_from_weights,
                     make_grid, sobolev_norm)

__all__ = [
    "NonlinearitySpec", "ProblemSpec", "SolverConfig", "MountainPassReport",
    "ShootingResult", "GeometryProbe", "make_problem", "energy", "gradient_form",
    "residual", "residual_norm", "find_endpoint", "mp_geometry_probe",
    "nehari_scale", "nehari_project", "mountain_pass_solve", "shooting_oracle",
    "ps_inequality_check", "morse_index", "gaussian_bump",
]


@dataclass(frozen=True)
class NonlinearitySpec:
    """f(t) = |t|^{q-2} t, F(t) = |t|^q / q, with Ambrosetti-Rabinowitz exponent theta.

    Only the pure power is shipped; other f would need their own kernels.
    """

    q: float
    theta: float | None = None
    kind: str = "pure_power"

    def __post_init__(self):
        if self.kind != "pure_power":
            raise ParameterError("kind == pure_power", f"unsupported nonlinearity {self.kind!r}")
        if self.theta is None:
            object.__setattr__(self, "theta", float(self.q))

    def f(self, t):
        t = np.asarray(t, dtype=float)
        return np.sign(t) * np.abs(t) ** (self.q - 1)

    def F(self, t):
        return np.abs(np.asarray(t, dtype=float)) ** self.q / self.q


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    nf: object
    grid: object
    V: PotentialSpec
    nonlin: NonlinearitySpec
    sc: object = None
    eps_reg: float = 1e-12
    backend: str | None = None
    # cached arrays
    V_nodes: np.ndarray = field(default=None, repr=False)

    @property
    def kernels(self):
        return _kernels if self.backend is None else _kernels.backend_module(self.backend)

    @property
    def l_star(self):
        N, l = self.grid.N, self.nf.l
        return l * N / (N - l) if l < N else math.inf


def make_problem(nf, grid, V=None, nonlin=None, q=None, theta=None, eps_reg=1e-12,
                 backend=None, check=True):
    """Assemble a ProblemSpec and enforce the admissibility window
    m < theta <= q < l*, inf V > 0 and a quadrature rule with positive weights."""
    V = V if V is not None else PotentialSpec.constant(1.0)
    if nonlin is None:
        if q is None:
            raise ParameterError("q given", "either nonlin or q must be given")
        nonlin = NonlinearitySpec(float(q), theta)
    V_nodes = np.ascontiguousarray(V.on(grid))
    if grid.rule == "simpson" or not np.all(grid.weights > 0):
        raise ParameterError("positive quadrature weights",
                             "the solver needs strictly positive nodal weights; "
                             "use the finite_volume or trapezoid rule")
    N, l, m = grid.N, nf.l, nf.m
    l_star = l * N / (N - l) if l < N else math.inf
    if check:
        q_, th = nonlin.q, nonlin.theta
        if not (m < q_ < l_star):
            raise ParameterError(
                "m < q < l*", f"q = {q_:g} outside the admissibility window "
                f"(m, l*) = ({m:g}, {l_star:g})")
        if not (m < th <= q_):
            raise ParameterError("m < theta <= q", f"theta = {th:g} must lie in (m, q] = ({m:g}, {q_:g}]")
    try:
        sc = sobolev_conjugate(nf, N)
    except ValueError:
        sc = None
    return ProblemSpec(nf, grid, V, nonlin, sc, eps_reg, backend, V_nodes)


def _vals(prob, u):
    if isinstance(u, GridFunction):
        if u.grid is not prob.grid and not np.array_equal(u.grid.nodes, prob.grid.nodes):
            raise ValueError("function does not live on the problem grid")
        return u.values
    return np.asarray(u, dtype=float)


def _args(prob, u):
    g = prob.grid
    return (prob.nf.code, prob.nf.params, float(prob.nonlin.q), np.ascontiguousarray(u, dtype=float),
            g.cell_widths, g.cell_measures, g.weights, prob.V_nodes)


def energy_parts(prob, u):
    """(int A(|u'|), int V A(|u|), int F(u)) of the discrete energy, omega included."""
    om = prob.grid.surface_area
    gr, pot, nl = prob.kernels.energy_parts(*_args(prob, _vals(prob, u)))
    return om * gr, om * pot, om * nl


def energy(prob, u):
    """Discrete energy J(u)."""
    gr, pot, nl = energy_parts(prob, u)
    J = gr + pot - nl
    if not math.isfinite(J):
        raise FloatingPointError("energy is not finite")
    return J


def gradient_form(prob, u):
    """Exact gradient dJ/du_i of the discrete energy (Dirichlet node zeroed)."""
    g = prob.grid.surface_area * prob.kernels.gradient(*_args(prob, _vals(prob, u)))
    g[-1] = 0.0
    return g


def residual(prob, u):
    """Strong-form residual: the discrete gradient divided by the nodal mass."""
    g = gradient_form(prob, u) / (prob.grid.surface_area * prob.grid.weights)
    return GridFunction(prob.grid, g)


def residual_norm(prob, u):
    return float(np.max(np.abs(residual(prob, u).values)))


def _hessian(prob, u, include_nonlin):
    om = prob.grid.surface_area
    d, o = prob.kernels.hessian_bands(*_args(prob, u), prob.eps_reg, include_nonlin)
    return om * np.asarray(d)[:-1], om * np.asarray(o)[:-1]


def morse_index(prob, u):
    """Number of negative eigenvalues of the discrete Hessian on free nodes
    (Sylvester inertia of the tridiagonal LDL^T factorization)."""
    d, o = _hessian(prob, _vals(prob, u), True)
    neg = 0
    piv = d[0]
    neg += piv < 0
    for i in range(1, len(d)):
        piv = d[i] - o[i - 1] ** 2 / (piv if piv != 0 else 1e-300)
        neg += piv < 0
    return int(neg)


def gaussian_bump(grid, width=1.0):
    return GridFunction(grid, np.exp(-(grid.nodes / width) ** 2) * (grid.nodes < grid.R_max))


# ------------------------------------------------------------------ geometry

def find_endpoint(prob, phi, max_doublings=60):
    """Smallest t = 2^k (k <= max_doublings) with J(t phi) < 0; returns (t, t phi)."""
    v = _vals(prob, phi)
    if not np.any(v):
        raise ValueError("find_endpoint needs phi != 0")
    t = 1.0
    for _ in range(max_doublings + 1):
        if energy(prob, t * v) < 0:
            return t, GridFunction(prob.grid, t * v)
        t *= 2.0
    raise GeometryError(f"J(t phi) >= 0 up to t = 2^{max_doublings}; check theta and q")


@dataclass
class GeometryProbe:
    t: np.ndarray
    J: np.ndarray
    passed: bool
    eta: float
    t_plus: float
    t_e: float

    def rows(self):
        return list(zip(self.t.tolist(), self.J.tolist()))


def mp_geometry_probe(prob, phi, t_grid=None):
    """J(t phi) for phi normalized to unit Orlicz-Sobolev norm.

    Passes iff the profile is positive up to its maximum and negative at the
    right end (rise to a positive peak, then a crossing below 0).
    """
    v = _vals(prob, phi)
    u = GridFunction(prob.grid, v)
    nrm = sobolev_norm(prob.nf, u, prob.V)
    v = v / nrm
    if t_grid is None:
        t_e, _ = find_endpoint(prob, v)
        t_grid = np.concatenate([[0.0], np.geomspace(1e-3, 2 * t_e, 400)])
    t_grid = np.asarray(t_grid, dtype=float)
    J = np.array([energy(prob, t * v) for t in t_grid])
    neg = np.flatnonzero(J < 0)
    passed = False
    eta = float(J.max())
    t_plus = t_e = math.nan
    if neg.size and eta > 0:
        first_neg = neg[0]
        k = int(np.argmax(J[:first_neg]))
        rising = J[1:k + 1]
        passed = bool(np.all(rising > 0) and np.all(J[k:first_neg] > 0))
        t_plus, t_e = float(t_grid[k]), float(t_grid[first_neg])
    return GeometryProbe(t_grid, J, passed, eta, t_plus, t_e)


def _ray_derivative(prob, v, t):
    """<J'(t v), v> = d/dt J(t v)."""
    return float(np.dot(gradient_form(prob, t * v), v))


def nehari_scale(prob, u):
    """t > 0 with <J'(t u), t u> = 0, found by bracketing and Brent's method.

    Returns (t, ok); ok is False when no sign change was found.
    """
    v = _vals(prob, u)
    if not np.any(v):
        return 1.0, False
    lo = hi = 1.0
    g1 = _ray_derivative(prob, v, 1.0)
    if g1 == 0:
        return 1.0, True
    if g1 > 0:
        for _ in range(200):
            hi *= 2.0
            if _ray_derivative(prob, v, hi) < 0:
                break
        else:
            return 1.0, False
        lo = hi / 2
    else:
        for _ in range(200):
            lo *= 0.5
            if _ray_derivative(prob, v, lo) > 0:
                break
        else:
            return 1.0, False
        hi = lo * 2
    t = brentq(lambda s: _ray_derivative(prob, v, s), lo, hi, xtol=1e-300, rtol=1e-15, maxiter=200)
    return t, True


def nehari_project(prob, u):
    """Scale u onto the Nehari set along its ray (u unchanged if that fails)."""
    t, ok = nehari_scale(prob, u)
    if not ok:
        warnings.warn("nehari_project: no sign change along the ray; returning u", RuntimeWarning)
        return u if isinstance(u, GridFunction) else GridFunction(prob.grid, u)
    return GridFunction(prob.grid, t * _vals(prob, u))


# ------------------------------------------------------------------- solver

@dataclass
class SolverConfig:
    tol: float = 1e-6
    max_iter: int = 50_000
    path_points: int = 20
    seed: int = 0
    grid: dict = field(default_factory=lambda: {"N": 3, "R_max": 20.0, "M": 4000,
                                                "spacing": "uniform"})
    armijo_c1: float = 1e-4
    armijo_shrink: float = 0.5
    initial_step: float = 1.0
    newton_switch: float = 1e-2
    eps_reg: float = 1e-12

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        bad = set(d) - known
        if bad:
            raise ParameterError("known solver fields", f"unknown solver config fields: {sorted(bad)}")
        cfg = cls(**d)
        gbad = set(cfg.grid) - {"N", "R_max", "M", "spacing", "rule"}
        if gbad:
            raise ParameterError("known grid fields", f"unknown grid fields: {sorted(gbad)}")
        return cfg

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def make_grid(self):
        g = dict(self.grid)
        return make_grid(int(g["N"]), float(g["R_max"]), int(g["M"]),
                         spacing=g.get("spacing", "uniform"), rule=g.get("rule", "finite_volume"))


@dataclass
class MountainPassReport:
    u: GridFunction
    c: float
    residual_norm: float
    path_energies: list
    iterations: int
    endpoint_scale: float
    converged: bool
    newton_steps: int = 0
    morse_index: int | None = None
    eps_reg: float = 1e-12
    history: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_dict(self, include_meta=True):
        d = {
            "c": self.c,
            "residual_norm": self.residual_norm,
            "path_energies": [float(x) for x in self.path_energies],
            "iterations": self.iterations,
            "endpoint_scale": self.endpoint_scale,
            "converged": self.converged,
            "newton_steps": self.newton_steps,
            "morse_index": self.morse_index,
            "eps_reg": self.eps_reg,
            "u0": float(self.u.values[0]),
        }
        if include_meta:
            d["meta"] = self.meta
        return d

    def to_json(self, include_meta=True):
        return json.dumps(self.to_dict(include_meta), indent=2, sort_keys=True)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "value"])
            for r, v in zip(self.u.grid.nodes, self.u.values):
                w.writerow([f"{r:.17g}", f"{v:.17g}"])


def _build_path(pivot, e, P):
    half = P // 2
    s = np.arange(P + 1)
    path = np.empty((P + 1, pivot.size))
    a = s[: half + 1] / half
    path[: half + 1] = a[:, None] * pivot
    b = (s[half:] - half) / (P - half)
    path[half:] = pivot + b[:, None] * (e - pivot)
    return path


def _initial_phi(prob, seed):
    rng = np.random.default_rng(seed)
    width = 1.0 + 0.1 * rng.uniform(-1.0, 1.0)
    phi = gaussian_bump(prob.grid, width)
    return phi.values / sobolev_norm(prob.nf, phi, prob.V)


def _newton(prob, u, res0, max_steps=30):
    """Newton iteration on the free nodes; stops when the residual stalls."""
    steps = 0
    res = res0
    while steps < max_steps:
        g = gradient_form(prob, u)[:-1]
        d, o = _hessian(prob, u, True)
        ab = np.zeros((3, d.size))
        ab[0, 1:] = o
        ab[1] = d
        ab[2, :-1] = o
        try:
            du = solve_banded((1, 1), ab, g)
        except (np.linalg.LinAlgError, ValueError):
            break
        improved = False
        for lam in (1.0, 0.5, 0.25):
            trial = u.copy()
            trial[:-1] -= lam * du
            r_t = residual_norm(prob, trial)
            if math.isfinite(r_t) and r_t < res:
                u, res, improved = trial, r_t, True
                break
        steps += 1
        if not improved:
            break
    return u, res, steps


def mountain_pass_solve(prob, cfg=None, phi=None):
    """Path-deformation mountain-pass solver; see the module docstring."""
    cfg = cfg or SolverConfig()
    t_start = time.perf_counter()
    grid = prob.grid
    om = grid.surface_area
    P = max(4, int(cfg.path_points))
    v0 = _initial_phi(prob, cfg.seed) if phi is None else _vals(prob, phi).copy()
    t_e, e_gf = find_endpoint(prob, v0)
    e = e_gf.values
    t_n, ok = nehari_scale(prob, v0)
    pivot = t_n * v0 if ok else 0.5 * e

    history = []
    newton_steps = 0
    newton_block = math.inf
    converged = False
    it = 0
    energies = None
    u = pivot
    res = math.inf
    while it < cfg.max_iter:
        it += 1
        path = _build_path(pivot, e, P)
        energies = np.array([energy(prob, p) for p in path])
        k = int(np.argmax(energies))
        if k == 0 or k == P:
            raise GeometryError(f"path maximum at endpoint index {k}: the path collapsed")
        u = path[k]
        t_n, ok = nehari_scale(prob, u)
        if ok:
            u = t_n * u
        u[-1] = 0.0
        J_u = energy(prob, u)
        g = gradient_form(prob, u)
        res = float(np.max(np.abs(g[:-1] / (om * grid.weights[:-1]))))
        history.append((it, J_u, res))
        if res < cfg.tol:
            converged = True
            break
        if res < cfg.newton_switch and res < newton_block:
            u_new, res_new, ns = _newton(prob, u, res)
            newton_steps += ns
            if res_new < res:
                u, res = u_new, res_new
                history.append((it, energy(prob, u), res))
                if res < cfg.tol:
                    converged = True
                    break
            newton_block = 0.5 * res
        # preconditioned descent direction: (Hessian of the A-terms) d = g
        dA, oA = _hessian(prob, u, False)
        ab = np.zeros((2, dA.size))
        ab[0, 1:] = oA
        ab[1] = dA
        d = np.zeros_like(u)
        d[:-1] = solveh_banded(ab, g[:-1], lower=False)
        slope = float(np.dot(g, d))
        step = cfg.initial_step
        while True:
            trial = u - step * d
            if energy(prob, trial) <= J_u - cfg.armijo_c1 * step * slope:
                break
            step *= cfg.armijo_shrink
            if step < 1e-14:
                break
        t_n, ok = nehari_scale(prob, trial)
        pivot = t_n * trial if ok else trial
        # keep the endpoint on the pivot's ray so the path stays in the class
        # of paths from 0 to the sublevel set {J < 0}
        t_e, e_gf = find_endpoint(prob, pivot)
        e = e_gf.values
    u_gf = GridFunction(grid, u)
    c = energy(prob, u)
    rep = MountainPassReport(
        u=u_gf, c=c, residual_norm=res,
        path_energies=[] if energies is None else energies.tolist(),
        iterations=it, endpoint_scale=float(t_e),
        converged=bool(converged and c > 0 and np.any(u)),
        newton_steps=newton_steps, morse_index=morse_index(prob, u),
        eps_reg=prob.eps_reg, history=history,
        meta={"elapsed_s": time.perf_counter() - t_start, "backend": prob.kernels.__name__},
    )
    return rep


# ------------------------------------------------------------------ oracle

@dataclass
class ShootingResult:
    profile: GridFunction
    u0: float
    valid_radius: float
    bracket: tuple


def _shoot(p_exp, N, V, q, u0, r_end, r0=1e-6, rtol=1e-12, atol=1e-14, dense=False,
           max_step=np.inf):
    """Integrate from the series start; returns (kind, r_event, sol) with kind
    'over' (u hit 0), 'under' (u' hit 0) or 'none'."""
    pm1 = p_exp - 1.0
    F0 = V * p_exp * u0 ** pm1 - u0 ** (q - 1)
    # series start: flux ~ F0 r^N / N, u' ~ -(|F0| r / (N p))^{1/(p-1)}
    du0 = np.sign(F0) * (abs(F0) * r0 / (N * p_exp)) ** (1.0 / pm1)
    u_start = u0 + du0 * r0 * pm1 / p_exp
    flux0 = F0 * r0**N / N

    def rhs(r, y):
        u, fl = y
        up = np.sign(fl) * (abs(fl) / (p_exp * r ** (N - 1))) ** (1.0 / pm1)
        au = abs(u)
        return [up, r ** (N - 1) * (V * p_exp * au ** (pm1 - 1) * u - au ** (q - 2) * u)]

    def hit_zero(r, y):
        return y[0]
    hit_zero.terminal = True
    hit_zero.direction = -1

    def turn(r, y):
        return y[1]
    turn.terminal = True
    turn.direction = 1

    sol = solve_ivp(rhs, (r0, r_end), [u_start, flux0], method="DOP853", rtol=rtol, atol=atol,
                    events=[hit_zero, turn], dense_output=dense, max_step=max_step)
    if sol.t_events[0].size:
        return "over", float(sol.t_events[0][0]), sol
    if sol.t_events[1].size:
        return "under", float(sol.t_events[1][0]), sol
    return "none", r_end, sol


def shooting_oracle(prob, r_end=None, max_bisect=200, rtol=1e-12, atol=1e-14, max_step=1e-3):
    """Decaying positive radial solution for A = t^p, constant V and pure-power f.

    Bisection on u(0): too large overshoots (u crosses 0), too small
    undershoots (u turns back up). The profile is evaluated on the problem
    grid up to the radius where the best shot stays valid and set to 0 beyond.
    """
    nf = prob.nf
    if nf.name != "power":
        raise ParameterError("power family", "the shooting oracle needs A(t) = t^p")
    if prob.V.kind != "constant":
        raise ParameterError("constant potential", "the shooting oracle needs V = const")
    p_exp, N, V, q = float(nf.params[0]), prob.grid.N, float(prob.V.value), float(prob.nonlin.q)
    r_end = r_end or prob.grid.R_max
    u_star = (V * p_exp) ** (1.0 / (q - p_exp))
    lo = u_star * (1 + 1e-6)
    kind, _, _ = _shoot(p_exp, N, V, q, lo, r_end, rtol=rtol, atol=atol)
    if kind != "under":
        raise OracleError("shooting from just above the constant state did not undershoot")
    hi = lo
    for _ in range(200):
        hi *= 1.25
        kind, _, _ = _shoot(p_exp, N, V, q, hi, r_end, rtol=rtol, atol=atol)
        if kind == "over":
            break
        lo = hi
    else:
        raise OracleError("no overshooting u(0) found")
    for _ in range(max_bisect):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        kind, _, _ = _shoot(p_exp, N, V, q, mid, r_end, rtol=rtol, atol=atol)
        if kind == "over":
            hi = mid
        else:
            lo = mid
    kind, r_valid, sol = _shoot(p_exp, N, V, q, lo, r_end, rtol=rtol, atol=atol, dense=True,
                                max_step=max_step)
    r = prob.grid.nodes
    vals = np.zeros_like(r)
    r0 = sol.t[0]
    inside = (r >= r0) & (r <= r_valid)
    vals[inside] = sol.sol(r[inside])[0]
    vals[r < r0] = lo
    return ShootingResult(GridFunction(prob.grid, vals), lo, r_valid, (lo, hi))


# ---------------------------------------------------------------- PS audit

def ps_inequality_check(prob, u, tol=1e-9):
    """J(u) - <J'(u), u>/theta >= (theta - m)/theta [int A(|u'|) + int V A(|u|)],
    plus the norm-side bound int A(|u'|) + int V A(|u|) >= xi0(||u'||_A) + xi0(||u||_{V,A})."""
    v = _vals(prob, u)
    th, m = prob.nonlin.theta, prob.nf.m
    gr, pot, nl = energy_parts(prob, v)
    J = gr + pot - nl
    pair = float(np.dot(gradient_form(prob, v), v))
    lhs_main = (th - m) / th * (gr + pot)
    rhs_main = J - pair / th
    g = prob.grid
    om = g.surface_area
    slopes = np.diff(v) / g.cell_widths
    n_grad = luxemburg_from_weights(prob.nf.A, prob.nf.l, prob.nf.m, slopes, om * g.cell_measures)
    n_pot = luxemburg_from_weights(prob.nf.A, prob.nf.l, prob.nf.m, v, om * g.weights * prob.V_nodes)
    lhs_norm = float(prob.nf.xi0(n_grad) + prob.nf.xi0(n_pot))
    rhs_norm = gr + pot
    rep = CheckReport.from_margins(
        "ps_inequality", ["energy_side", "norm_side"], [lhs_main, lhs_norm], [rhs_main, rhs_norm], tol,
        details={"J": J, "pairing": pair, "theta": th, "m": m,
                 "norm_grad": n_grad, "norm_V": n_pot})
    return rep
