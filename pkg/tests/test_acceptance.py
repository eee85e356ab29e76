"""Acceptance criteria, one recorded PASS/FAIL line per check at its pinned tolerance."""
import math
import time

import numpy as np
import pytest

from orliczkit.errors import DivergenceError
from orliczkit.inequalities import (f3_ratio_check, legendre_roundtrip, lemma_f0_check,
                                    lions_vanishing_demo, random_decaying_profile,
                                    sandwich_check, strauss_check, young_check)
from orliczkit.nfunction import NFunctionSpec, build, conjugate_eval, sobolev_conjugate
from orliczkit.radial import GridFunction, luxemburg_norm, make_grid, modular
from orliczkit.solver import (NonlinearitySpec, SolverConfig, energy, find_endpoint,
                              gaussian_bump, gradient_form, make_problem, mountain_pass_solve,
                              mp_geometry_probe, ps_inequality_check, residual_norm,
                              shooting_oracle)

FAMILIES = {
    "power": NFunctionSpec("power", p=2.5),
    "power_sum": NFunctionSpec("power_sum", p=2.0, q=3.0),
    "curvature": NFunctionSpec("curvature", gamma=1.5),
    "power_log": NFunctionSpec("power_log", p=2.6),
}
CHECKS = ("young", "lemma_f0", "sandwich_F1", "sandwich_F2", "f3_ratio")
TOL = 1e-9
SAMPLES = 1000


# --------------------------------------------------------------- criterion 1

def _run_check(name, nf, N=3):
    if name == "young":
        return young_check(nf, SAMPLES)
    if name == "lemma_f0":
        return lemma_f0_check(nf, SAMPLES)
    if name == "sandwich_F1":
        return sandwich_check(nf, "F1", SAMPLES)
    sc = sobolev_conjugate(nf, N)
    if name == "sandwich_F2":
        return sandwich_check(sc, "F2", SAMPLES)
    return f3_ratio_check(sc, SAMPLES)


@pytest.fixture(scope="module")
def suite_results():
    out = {}
    t0 = time.perf_counter()
    for fam, spec in FAMILIES.items():
        nf = build(spec)
        for name in CHECKS:
            try:
                out[fam, name] = _run_check(name, nf)
            except DivergenceError as exc:
                out[fam, name] = exc
    out["elapsed"] = time.perf_counter() - t0
    return out


@pytest.mark.parametrize("check", CHECKS)
@pytest.mark.parametrize("family", FAMILIES)
def test_c1_inequality_suite(suite_results, acceptance, family, check):
    rep = suite_results[family, check]
    if isinstance(rep, Exception):
        acceptance(1, f"{check} [{family}, N=3]", False, f"{type(rep).__name__}: {rep}")
    acceptance(1, f"{check} [{family}, N=3], {rep.samples} samples", rep.passed
               and rep.samples >= SAMPLES and rep.worst_margin >= -TOL,
               f"worst_margin={rep.worst_margin:.3e} >= -{TOL:g}")


def test_c1_runtime(suite_results, acceptance):
    acceptance(1, "inequality suite runtime", suite_results["elapsed"] < 30.0,
               f"{suite_results['elapsed']:.2f} s < 30 s")


# --------------------------------------------------------------- criterion 2

@pytest.mark.parametrize("p", [1.5, 2.0, 2.5, 3.0, 4.5])
def test_c2_power_conjugate_closed_form(acceptance, p):
    nf = build(NFunctionSpec("power", p=p))
    s = np.logspace(-3, 3, 400)
    exact = (p - 1) * (s / p) ** (p / (p - 1))
    err = float(np.max(np.abs(conjugate_eval(nf, s) / exact - 1)))
    acceptance(2, f"Power({p}) conjugate vs closed form on [1e-3, 1e3]", err < 1e-8,
               f"max rel err {err:.2e} < 1e-8")


@pytest.mark.parametrize("family", FAMILIES)
def test_c2_legendre_roundtrip(acceptance, family):
    nf = build(FAMILIES[family])
    t = np.logspace(-2, 2, 15)
    err = float(np.max(np.abs(legendre_roundtrip(nf, t) / nf.A(t) - 1)))
    acceptance(2, f"biconjugate = A [{family}] by brute-force maximization", err < 1e-6,
               f"max rel err {err:.2e} < 1e-6")


# --------------------------------------------------------------- criterion 3

def test_c3_sobolev_conjugate_power(acceptance):
    sc = sobolev_conjugate(build(NFunctionSpec("power", p=2.0)), 3)
    t = np.logspace(-1, 1, 200)
    err = float(np.max(np.abs(sc.A(t) / (t / 6) ** 6 - 1)))
    acceptance(3, "A_* = (t/6)^6 for p=2, N=3 on [0.1, 10]", err < 1e-4,
               f"max rel err {err:.2e} < 1e-4")


# --------------------------------------------------------------- criterion 4

@pytest.mark.parametrize("p", [1.5, 2.0, 2.5, 3.0])
def test_c4_luxemburg_equals_lp(acceptance, p):
    grid = make_grid(3, 10.0, 4000, rule="simpson")
    nf = build(NFunctionSpec("power", p=p))
    u = GridFunction(grid, np.exp(-grid.nodes**2))
    exact = (math.pi / p) ** (1.5 / p)
    err = abs(luxemburg_norm(nf, u) / exact - 1)
    acceptance(4, f"Luxemburg norm = L^{p} norm of a Gaussian (N=3, R=10, M=4000)",
               err < 1e-6, f"rel err {err:.2e} < 1e-6")


def test_c4_unit_modular(acceptance):
    grid = make_grid(3, 10.0, 1000)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for k in range(100):
        nf = build(list(FAMILIES.values())[k % 4])
        u = random_decaying_profile(grid, rng) * rng.uniform(1e-2, 1e2)
        worst = max(worst, abs(modular(nf, u / luxemburg_norm(nf, u)) - 1))
    acceptance(4, "modular(u/||u||) = 1 on 100 random profiles, all families", worst < 1e-8,
               f"max |modular - 1| = {worst:.2e} < 1e-8")


# --------------------------------------------------------------- criterion 5

@pytest.mark.parametrize("N", [2, 3, 4])
@pytest.mark.parametrize("family", FAMILIES)
def test_c5_strauss(acceptance, family, N):
    nf = build(FAMILIES[family])
    grid = make_grid(N, 20.0, 2000)
    rng = np.random.default_rng(100 * N + len(family))
    violations = 0
    worst = math.inf
    for _ in range(50):
        rep = strauss_check(nf, random_decaying_profile(grid, rng), r_min=0.5)
        violations += len(rep.violations)
        worst = min(worst, rep.worst_margin)
    acceptance(5, f"Strauss bound, C=(K+1)/omega [{family}, N={N}], 50 profiles",
               violations == 0 and worst >= 0, f"violations={violations}, worst margin {worst:.3e}")


# --------------------------------------------------------------- criterion 6

def test_c6_lions(acceptance):
    A = build(NFunctionSpec("power", p=2.0))
    B = build(NFunctionSpec("power", p=4.0))
    grid = make_grid(3, 60.0, 4000)
    phi = GridFunction(grid, np.exp(-(grid.nodes / 10.0) ** 2))
    res = lions_vanishing_demo(A, B, phi, beta=3 / A.l, n_list=(1, 2, 4, 8, 16, 32), R=1.0)
    acceptance(6, "Lions vanishing demo, Power(2), B=Power(4), N=3", res.passed,
               f"window drop {res.window_drop:.3g} >= 10, ||u_n||_B drop {res.norm_drop:.3g} >= 10, "
               f"Sobolev modular drift {res.sobolev_drift:.3%} <= 5%")


# --------------------------------------------------------------- criterion 7

@pytest.fixture(scope="module")
def semilinear_run():
    prob = make_problem(build(NFunctionSpec("power", p=2.0)), make_grid(3, 20.0, 4000), q=4.0)
    t0 = time.perf_counter()
    rep = mountain_pass_solve(prob, SolverConfig(tol=1e-6))
    sh = shooting_oracle(prob)
    return prob, rep, sh, time.perf_counter() - t0


def test_c7_ground_state(semilinear_run, acceptance):
    prob, rep, sh, elapsed = semilinear_run
    r = prob.grid.nodes
    d0 = abs(rep.u.values[0] - sh.u0) / sh.u0
    sup = float(np.max(np.abs(rep.u.values - sh.profile.values)[r <= 10.0])) / sh.u0
    acceptance(7, "u_mp(0) vs u_shoot(0)", d0 < 1e-3, f"rel diff {d0:.2e} < 1e-3")
    acceptance(7, "profile agreement on [0, 10]", sup < 5e-3, f"rel sup diff {sup:.2e} < 5e-3")
    acceptance(7, "converged with c > 0", rep.converged and rep.c > 0, f"c = {rep.c:.6g}")
    acceptance(7, "residual sup-norm", rep.residual_norm < 1e-6,
               f"{rep.residual_norm:.2e} < 1e-6")
    acceptance(7, "runtime", elapsed < 300, f"{elapsed:.1f} s < 300 s")


# --------------------------------------------------------------- criterion 8

ORLICZ = NFunctionSpec("power_sum", p=2.0, q=3.0)


@pytest.fixture(scope="module")
def orlicz_runs():
    nf = build(ORLICZ)
    out = []
    for M in (2000, 4000):
        prob = make_problem(nf, make_grid(4, 20.0, M), nonlin=NonlinearitySpec(3.5, theta=3.5))
        out.append((prob, mountain_pass_solve(prob)))
    return out


def test_c8_orlicz_solve(orlicz_runs, acceptance):
    (p1, r1), (p2, r2) = orlicz_runs
    acceptance(8, "PowerSum(2,3), N=4, q=theta=3.5 converges", r2.converged and r2.residual_norm < 1e-5,
               f"residual {r2.residual_norm:.2e} < 1e-5")
    acceptance(8, "mountain-pass level positive", r2.c > 0, f"c = {r2.c:.6g}")
    ps = ps_inequality_check(p2, r2.u)
    acceptance(8, "post-audit ps_inequality_check", ps.passed, f"worst margin {ps.worst_margin:.3e}")
    st = strauss_check(p2.nf, r2.u, 0.5)
    acceptance(8, "post-audit strauss_check", st.passed, f"worst margin {st.worst_margin:.3e}")
    change = abs(r2.c - r1.c) / abs(r1.c)
    acceptance(8, "level change under refinement M=2000 -> 4000", change < 0.01,
               f"{change:.2e} < 1%")


# --------------------------------------------------------------- criterion 9

@pytest.mark.parametrize("case", ["semilinear", "orlicz"])
def test_c9_geometry(case, acceptance):
    if case == "semilinear":
        prob = make_problem(build(NFunctionSpec("power", p=2.0)), make_grid(3, 20.0, 4000), q=4.0)
    else:
        prob = make_problem(build(ORLICZ), make_grid(4, 20.0, 4000), nonlin=NonlinearitySpec(3.5, 3.5))
    phi = gaussian_bump(prob.grid)
    probe = mp_geometry_probe(prob, phi)
    t_e, _ = find_endpoint(prob, phi)
    doublings = int(round(math.log2(t_e)))
    acceptance(9, f"J(t phi) > 0 on (0, t+] then < 0 [{case}]", probe.passed,
               f"t+ = {probe.t_plus:.4g}, eta = {probe.eta:.4g}, crossing at {probe.t_e:.4g}")
    acceptance(9, f"find_endpoint doublings [{case}]", doublings <= 60, f"{doublings} <= 60")


# -------------------------------------------------------------- criterion 10

@pytest.mark.parametrize("family", FAMILIES)
def test_c10_gradient_consistency(family, acceptance):
    nf = build(FAMILIES[family])
    prob = make_problem(nf, make_grid(4, 10.0, 200), q=nf.m + 0.5, check=False)
    r = prob.grid.nodes
    rng = np.random.default_rng(10)
    ratios = []
    for _ in range(20):
        u = sum(rng.uniform(0.2, 3) * np.exp(-(r / rng.uniform(0.5, 3)) ** 2) for _ in range(3))
        u = (u + 0.05) * (1 - r / r[-1])
        phi = sum(rng.normal() * np.exp(-(r / rng.uniform(0.5, 3)) ** 2) for _ in range(3))
        phi = phi * (1 - r / r[-1])
        exact = float(np.dot(gradient_form(prob, u), phi))
        J0 = energy(prob, u)
        errs = [abs((energy(prob, u + h * phi) - J0) / h - exact) for h in (1e-4, 1e-5)]
        ratios.append(errs[0] / errs[1])
    ratios = np.array(ratios)
    ok = bool(np.all((ratios >= 8) & (ratios <= 12)))
    acceptance(10, f"first-order directional derivative, 20 pairs [{family}]", ok,
               f"error ratios in [{ratios.min():.3f}, {ratios.max():.3f}] within [8, 12]")
