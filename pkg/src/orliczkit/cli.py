"""Command-line entry point: ``orliczkit <command> [options]``.

Commands: inspect, conjugate, verify, strauss, lions, solve. Options come from
a JSON config (``--config``) with flags taking precedence. Exit codes: 0 on
success, 1 when a check or solve fails, 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from . import kernels
from .errors import DivergenceError, ParameterError
from .inequalities import (CheckReport, f3_ratio_check, legendre_roundtrip, lemma_f0_check,
                           lions_vanishing_demo, sandwich_check, strauss_check, young_check)
from .nfunction import NFunctionSpec, build, conjugate_eval, sobolev_conjugate
from .radial import GridFunction, PotentialSpec, make_grid, read_csv
from .solver import (NonlinearitySpec, SolverConfig, make_problem, mountain_pass_solve,
                     ps_inequality_check)

COMMANDS = ("inspect", "conjugate", "verify", "strauss", "lions", "solve")
FORMATS = ("json", "csv", "text")
GRID_KEYS = {"N", "R_max", "M", "spacing", "rule"}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    nfunction: NFunctionSpec = field(default_factory=lambda: NFunctionSpec("power", p=2.0))
    grid: dict = field(default_factory=lambda: {"N": 3, "R_max": 20.0, "M": 4000,
                                                "spacing": "uniform"})
    solver: SolverConfig = field(default_factory=SolverConfig)
    nonlinearity: dict = field(default_factory=dict)
    potential: dict = field(default_factory=lambda: {"kind": "constant", "value": 1.0})
    lions: dict = field(default_factory=dict)
    profile: str | None = None
    samples: int = 1000
    seed: int = 0
    output_dir: str | None = None
    format: str = "text"

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        bad = set(d) - known
        if bad:
            raise ConfigError(f"unknown config fields: {sorted(bad)}")
        d = dict(d)
        if "command" not in d:
            raise ConfigError("config needs a 'command'")
        try:
            if "nfunction" in d:
                d["nfunction"] = NFunctionSpec.from_dict(d["nfunction"])
            if "solver" in d:
                d["solver"] = SolverConfig.from_dict(d["solver"])
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {COMMANDS}")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}; expected one of {FORMATS}")
        gbad = set(self.grid) - GRID_KEYS
        if gbad:
            raise ConfigError(f"unknown grid fields: {sorted(gbad)}")
        nbad = set(self.nonlinearity) - {"q", "theta"}
        if nbad:
            raise ConfigError(f"unknown nonlinearity fields: {sorted(nbad)}")
        lbad = set(self.lions) - {"B", "beta", "n_list", "R", "sigma"}
        if lbad:
            raise ConfigError(f"unknown lions fields: {sorted(lbad)}")
        pbad = set(self.potential) - {"kind", "value", "values", "formula", "params"}
        if pbad:
            raise ConfigError(f"unknown potential fields: {sorted(pbad)}")
        if int(self.grid.get("N", 3)) < 2:
            raise ConfigError("grid.N must be >= 2")

    def to_dict(self):
        d = asdict(self)
        d["nfunction"] = self.nfunction.to_dict()
        d["solver"] = self.solver.to_dict()
        return d


def _parser():
    ap = argparse.ArgumentParser(prog="orliczkit", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--family", choices=("power", "power_sum", "curvature", "power_log"))
    ap.add_argument("--p", type=float)
    ap.add_argument("--q", type=float, help="second exponent of power_sum")
    ap.add_argument("--gamma", type=float)
    ap.add_argument("--dim", type=int, help="space dimension N")
    ap.add_argument("--rmax", type=float)
    ap.add_argument("--nodes", type=int, help="number of grid cells M")
    ap.add_argument("--tol", type=float)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--format", choices=FORMATS)
    ap.add_argument("--exponent", type=float, help="exponent of f(u) = |u|^(exponent-2) u (solve)")
    ap.add_argument("--theta", type=float, help="Ambrosetti-Rabinowitz exponent (solve)")
    ap.add_argument("--profile", help="CSV profile r,value (strauss)")
    ap.add_argument("--samples", type=int, help="samples per check (verify)")
    return ap


def load_config(argv):
    args = _parser().parse_args(argv)
    d = {}
    if args.config:
        try:
            with open(args.config) as fh:
                d = json.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {args.config}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {args.config}: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
    d["command"] = args.command
    nf = dict(d.get("nfunction", {"family": "power", "p": 2.0}))
    if args.family is not None and args.family != nf.get("family"):
        nf = {"family": args.family}
    for k in ("p", "q", "gamma"):
        v = getattr(args, k)
        if v is not None:
            nf[k] = v
    d["nfunction"] = nf
    grid = dict(d.get("grid", RunConfig("inspect").grid))
    if args.dim is not None:
        grid["N"] = args.dim
    if args.rmax is not None:
        grid["R_max"] = args.rmax
    if args.nodes is not None:
        grid["M"] = args.nodes
    d["grid"] = grid
    solver = dict(d.get("solver", {}))
    if args.tol is not None:
        solver["tol"] = args.tol
    if args.seed is not None:
        solver["seed"] = args.seed
        d["seed"] = args.seed
    d["solver"] = solver
    nonlin = dict(d.get("nonlinearity", {}))
    if args.exponent is not None:
        nonlin["q"] = args.exponent
    if args.theta is not None:
        nonlin["theta"] = args.theta
    d["nonlinearity"] = nonlin
    if args.out is not None:
        d["output_dir"] = args.out
    if args.format is not None:
        d["format"] = args.format
    if args.profile is not None:
        d["profile"] = args.profile
    if args.samples is not None:
        d["samples"] = args.samples
    return RunConfig.from_dict(d)


# ---------------------------------------------------------------- commands

def _grid(cfg):
    g = cfg.grid
    return make_grid(int(g.get("N", 3)), float(g.get("R_max", 20.0)), int(g.get("M", 4000)),
                     spacing=g.get("spacing", "uniform"), rule=g.get("rule", "finite_volume"))


def _table(header, rows):
    return {"columns": list(header), "rows": [[_num(x) for x in r] for r in rows]}


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else str(x)


def cmd_inspect(cfg):
    nf = build(cfg.nfunction)
    t = np.logspace(-2, 2, 9)
    result = {
        "nfunction": cfg.nfunction.to_dict(),
        "l": nf.l, "m": nf.m, "K": nf.K,
        "table": _table(("t", "A", "a", "ratio"), zip(t, nf.A(t), nf.a(t), nf.ratio(t))),
    }
    return result, True


def cmd_conjugate(cfg):
    nf = build(cfg.nfunction)
    N = int(cfg.grid.get("N", 3))
    t = np.logspace(-2, 2, 9)
    s = nf.dA(t)
    conj = conjugate_eval(nf, s)
    bicon = legendre_roundtrip(nf, t, grid_points=401)
    result = {
        "nfunction": cfg.nfunction.to_dict(), "N": N,
        "conjugate": _table(("s", "conjugate", "biconjugate_rel_error"),
                            zip(s, conj, np.abs(bicon / nf.A(t) - 1))),
    }
    ok = bool(np.all(np.abs(bicon / nf.A(t) - 1) < 1e-6))
    try:
        sc = sobolev_conjugate(nf, N)
    except DivergenceError as exc:
        result["sobolev_conjugate"] = {"error": str(exc)}
        return result, False
    As = sc.A(t)
    back = sc.inverse(As)
    err = np.abs(back / t - 1)
    result["sobolev_conjugate"] = {
        "l_star": _num(sc.l_star), "m_star": _num(sc.m_star),
        "table": _table(("t", "A_star", "roundtrip_rel_error"), zip(t, As, err)),
    }
    return result, ok and bool(np.all(err < 1e-8))


def _verify_reports(cfg):
    nf = build(cfg.nfunction)
    N = int(cfg.grid.get("N", 3))
    n = int(cfg.samples)
    reports = [young_check(nf, n, seed=cfg.seed), lemma_f0_check(nf, n),
               sandwich_check(nf, "F1", n, seed=cfg.seed)]
    try:
        sc = sobolev_conjugate(nf, N)
        reports += [sandwich_check(sc, "F2", n, seed=cfg.seed), f3_ratio_check(sc, n, seed=cfg.seed)]
    except DivergenceError as exc:
        for name in ("sandwich_F2", "f3_ratio"):
            reports.append(CheckReport(f"{name}[{nf.name},N={N}]", 0, -math.inf, [], False,
                                       details={"error": str(exc)}))
    grid = make_grid(N, 20.0, 4000)
    u = GridFunction(grid, np.exp(-grid.nodes**2))
    reports.append(strauss_check(nf, u, 0.5))
    return reports


def cmd_verify(cfg):
    reports = _verify_reports(cfg)
    return {"reports": [r.to_dict() for r in reports]}, all(r.passed for r in reports)


def cmd_strauss(cfg):
    nf = build(cfg.nfunction)
    N = int(cfg.grid.get("N", 3))
    if cfg.profile:
        if not os.path.exists(cfg.profile):
            raise ConfigError(f"profile not found: {cfg.profile}")
        u = read_csv(cfg.profile, N)
    else:
        grid = _grid(cfg)
        u = GridFunction(grid, np.exp(-grid.nodes**2))
    rep = strauss_check(nf, u, 0.5)
    return {"reports": [rep.to_dict()]}, rep.passed


def cmd_lions(cfg):
    A = build(cfg.nfunction)
    N = int(cfg.grid.get("N", 3))
    opts = cfg.lions
    B = build(NFunctionSpec.from_dict(opts.get("B", {"family": "power", "p": 4.0})))
    beta = float(opts.get("beta") or N / A.l)
    sigma = float(opts.get("sigma", 10.0))
    grid = make_grid(N, 6 * sigma, int(cfg.grid.get("M", 4000)))
    phi = GridFunction(grid, np.exp(-(grid.nodes / sigma) ** 2))
    res = lions_vanishing_demo(A, B, phi, beta, tuple(opts.get("n_list", (1, 2, 4, 8, 16, 32))),
                               float(opts.get("R", 1.0)))
    out = res.to_dict()
    out["csv"] = res.to_csv()
    return out, res.passed


def cmd_solve(cfg):
    nf = build(cfg.nfunction)
    grid = _grid(cfg)
    # the run-level grid is authoritative; mirror it into the solver record
    cfg.solver.grid = dict(cfg.grid)
    if "q" not in cfg.nonlinearity:
        raise ConfigError("solve needs nonlinearity.q (or --exponent)")
    nonlin = NonlinearitySpec(float(cfg.nonlinearity["q"]), cfg.nonlinearity.get("theta"))
    pot = cfg.potential
    V = PotentialSpec(pot.get("kind", "constant"), float(pot.get("value", 1.0)),
                      tuple(pot["values"]) if pot.get("values") is not None else None,
                      pot.get("formula"), pot.get("params"))
    prob = make_problem(nf, grid, V, nonlin, eps_reg=cfg.solver.eps_reg)
    rep = mountain_pass_solve(prob, cfg.solver)
    audits = [ps_inequality_check(prob, rep.u), strauss_check(nf, rep.u, 0.5)]
    result = {"report": rep.to_dict(include_meta=False),
              "audits": [a.to_dict() for a in audits]}
    ok = rep.converged and all(a.passed for a in audits)
    return result, ok, rep


HANDLERS = {"inspect": cmd_inspect, "conjugate": cmd_conjugate, "verify": cmd_verify,
            "strauss": cmd_strauss, "lions": cmd_lions}


def _text(command, result, ok):
    lines = [f"{command}: {'ok' if ok else 'FAILED'}"]
    if "reports" in result:
        for r in result["reports"]:
            lines.append(f"  [{'PASS' if r['passed'] else 'FAIL'}] {r['name']} "
                         f"worst_margin={r['worst_margin']}")
    elif "csv" in result:
        lines.append(result["csv"].rstrip())
    else:
        lines.append(json.dumps(result, indent=2, sort_keys=True))
    return "\n".join(lines)


def _csv(result):
    if "csv" in result:
        return result["csv"]
    for key in ("table",):
        if key in result:
            t = result[key]
            rows = [",".join(t["columns"])] + [",".join(f"{x!r}" if isinstance(x, str) else f"{x:.17g}"
                                                        for x in r) for r in t["rows"]]
            return "\n".join(rows) + "\n"
    if "reports" in result:
        rows = ["name,samples,worst_margin,passed"]
        rows += [f"{r['name']},{r['samples']},{r['worst_margin']},{r['passed']}" for r in result["reports"]]
        return "\n".join(rows) + "\n"
    return None


def run(cfg):
    """Execute a validated RunConfig; returns the exit code."""
    t0 = time.perf_counter()
    rep = None
    if cfg.command == "solve":
        result, ok, rep = cmd_solve(cfg)
    else:
        result, ok = HANDLERS[cfg.command](cfg)
    config = cfg.to_dict()
    # where the files go is not part of the result
    config.pop("output_dir")
    payload = {"command": cfg.command, "passed": bool(ok), "result": result, "config": config}
    meta = {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "elapsed_s": time.perf_counter() - t0, "version": __version__,
            "backend": kernels.BACKEND, "python": platform.python_version()}
    text_json = json.dumps(payload, indent=2, sort_keys=True)
    if cfg.format == "json":
        print(text_json)
    elif cfg.format == "csv" and _csv(result) is not None:
        sys.stdout.write(_csv(result))
    else:
        print(_text(cfg.command, result, ok))
    if cfg.output_dir:
        os.makedirs(cfg.output_dir, exist_ok=True)
        base = os.path.join(cfg.output_dir, cfg.command)
        with open(base + ".json", "w") as fh:
            fh.write(text_json + "\n")
        with open(base + ".meta.json", "w") as fh:
            json.dump({"meta": meta}, fh, indent=2, sort_keys=True)
        csv_text = _csv(result)
        if csv_text is not None:
            with open(base + ".csv", "w") as fh:
                fh.write(csv_text)
        if rep is not None:
            rep.write_csv(os.path.join(cfg.output_dir, "solution.csv"))
    return 0 if ok else 1


def main(argv=None):
    try:
        cfg = load_config(argv)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(cfg)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(json.dumps({"command": cfg.command, "passed": False,
                          "error": f"{type(exc).__name__}: {exc}"}, indent=2, sort_keys=True))
        return 1


if __name__ == "__main__":
    sys.exit(main())
