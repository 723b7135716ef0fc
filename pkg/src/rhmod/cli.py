"""Command-line front end: solve / sweep / compare / check-signs /
detect-genus / selftest, with INI config files and deterministic CSV/JSON
artifacts."""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from pathlib import Path

import numpy as np

from .analysis import check_signs, detect_genus, sign_report_json_obj
from .continuation import sweep
from .errors import ConfigError, NearBreakError, RhmodError
from .geometry import BranchpointSet
from .modulation import newton_solve, seed_from_config
from .params import ProblemParams, Tolerances
from .rhp_core import solve_rhp

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_CONFIG = 2
EXIT_NEAR_BREAK = 3


def _parse_seeds(text: str):
    try:
        return [complex(tok.strip().replace(" ", "")) for tok in text.split(",") if tok.strip()]
    except ValueError as err:
        raise ConfigError(f"cannot parse seed list {text!r}: {err}") from None


def _load_config(path):
    cp = configparser.ConfigParser()
    if not Path(path).exists():
        raise ConfigError(f"config file {path} not found")
    cp.read(path)
    return cp


def _build_params(args, cfg) -> ProblemParams:
    def pick(flag, section, key, cast, default=None):
        if flag is not None:
            return flag
        if cfg is not None and cfg.has_option(section, key):
            return cast(cfg.get(section, key))
        if default is not None:
            return default
        raise ConfigError(f"missing parameter {key}")
    x = pick(args.x, "params", "x", float)
    t = pick(args.t, "params", "t", float)
    mu = pick(args.mu, "params", "mu", float)
    genus = int(pick(args.genus, "params", "genus", int, default=0)
                if args.genus is not None or (cfg and cfg.has_option("params", "genus"))
                else 0)
    tols = Tolerances()
    if cfg is not None and cfg.has_section("tolerances"):
        kw = {}
        for key in ("quad_tol", "tol_k", "realness_tol", "degeneracy_floor"):
            if cfg.has_option("tolerances", key):
                kw[key] = float(cfg.get("tolerances", key))
        tols = Tolerances(**kw)
    try:
        return ProblemParams(x=x, t=t, mu=mu, genus=genus, tols=tols)
    except ValueError as err:
        raise ConfigError(str(err)) from None


def _get_seeds(args, cfg, genus: int) -> BranchpointSet:
    text = args.seeds
    if text is None and cfg is not None and cfg.has_option("seeds", f"genus{genus}"):
        text = cfg.get("seeds", f"genus{genus}")
    if text is None:
        raise ConfigError(f"no seeds given for genus {genus}")
    return seed_from_config(genus, _parse_seeds(text))


def _cmd_solve(args, cfg) -> int:
    p = _build_params(args, cfg)
    seeds = _get_seeds(args, cfg, p.genus)
    rep = newton_solve(seeds, p)
    sol = solve_rhp(rep.alphas, p)
    print(f"converged in {rep.iterations} iterations, "
          f"max residual {rep.max_residual:.3e}")
    for i, a in enumerate(rep.alphas.upper):
        print(f"  alpha_{2 * i} = {a.real:+.15f} {a.imag:+.15f}i")
    for i, (w, o) in enumerate(zip(sol.W, sol.Omega), start=1):
        print(f"  W_{i} = {w:+.15f}   Omega_{i} = {o:+.15f}")
    print(f"  D = {sol.D.real:+.15e}")
    if args.json:
        obj = {"schema": 1, "x": p.x, "t": p.t, "mu": p.mu, "genus": p.genus,
               "alphas": [[a.real, a.imag] for a in rep.alphas.upper],
               "W": list(sol.W), "Omega": list(sol.Omega),
               "D": [sol.D.real, sol.D.imag],
               "residuals": list(map(float, rep.residuals))}
        Path(args.json).write_text(json.dumps(obj, indent=1))
    return EXIT_OK


def _sweep_args(args, cfg):
    def pick(flag, key, cast):
        if flag is not None:
            return flag
        if cfg is not None and cfg.has_option("sweep", key):
            return cast(cfg.get("sweep", key))
        raise ConfigError(f"missing sweep option {key}")
    param = pick(args.param, "param", str)
    lo = pick(args.lo, "lo", float)
    hi = pick(args.hi, "hi", float)
    step = pick(args.step, "step", float)
    if param not in ("mu", "x", "t"):
        raise ConfigError(f"sweep parameter must be mu, x or t, got {param!r}")
    if not hi >= lo:
        raise ConfigError("sweep needs hi >= lo")
    if not step > 0:
        raise ConfigError("sweep needs step > 0")
    return param, lo, hi, step


def _emit_trace(trace, args) -> None:
    if args.csv:
        Path(args.csv).write_text(trace.csv_text())
    if args.json:
        Path(args.json).write_text(trace.json_text())


def _cmd_sweep(args, cfg, method=None) -> int:
    p = _build_params(args, cfg)
    seeds = _get_seeds(args, cfg, p.genus)
    param, lo, hi, step = _sweep_args(args, cfg)
    method = method or args.method
    trace = sweep(param, lo, hi, step, method, p, seeds)
    _emit_trace(trace, args)
    print(f"sweep {param} in [{lo}, {hi}] step {step}: "
          f"{len(trace.samples)} samples ({method})")
    if method == "both":
        gap = trace.max_method_gap()
        verdict = "PASS" if gap < 1e-3 else "FAIL"
        print(f"max|dalpha| = {gap:.6e} (< 1e-03: {verdict})")
        return EXIT_OK if gap < 1e-3 else EXIT_NUMERIC
    return EXIT_OK


def _cmd_check_signs(args, cfg) -> int:
    p = _build_params(args, cfg)
    seeds = _get_seeds(args, cfg, p.genus)
    rep = newton_solve(seeds, p)
    sol = solve_rhp(rep.alphas, p)
    sign = check_signs(sol)
    obj = sign_report_json_obj(sign)
    print(json.dumps(obj, indent=1))
    if args.json:
        Path(args.json).write_text(json.dumps(obj, indent=1))
    return EXIT_OK if sign.passed else EXIT_NUMERIC


def _cmd_detect_genus(args, cfg) -> int:
    p = _build_params(args, cfg)
    seeds = {}
    for g, flag in ((0, args.seeds0), (2, args.seeds2)):
        text = flag
        if text is None and cfg is not None and cfg.has_option("seeds", f"genus{g}"):
            text = cfg.get("seeds", f"genus{g}")
        if text is not None:
            seeds[g] = seed_from_config(g, _parse_seeds(text))
    if not seeds:
        raise ConfigError("detect-genus needs seeds for at least one genus")
    genus, solves, signs = detect_genus(p, seeds)
    for g in sorted(solves):
        print(f"genus {g}: solved (residual {solves[g].max_residual:.2e}), "
              f"signs {'PASS' if signs[g].passed else 'FAIL'}")
    if genus is None:
        print("genus: indeterminate (near a breaking curve?)")
        return EXIT_NEAR_BREAK
    print(f"genus = {genus}")
    return EXIT_OK


def _cmd_selftest(args, cfg) -> int:
    """Fast oracle suite: quadrature residues and a derivative check."""
    from .geometry import Radical, build_contour
    from .quadrature import integrate_family
    from .rhp_core import MomentCache, eval_K, eval_dK_dmu
    failures = 0

    bps = BranchpointSet((0.3 + 1.1j,))
    p = ProblemParams(x=-1.0, t=0.2, mu=2.0, genus=0)
    cs = build_contour(bps, p.mu)
    rad = Radical(bps, p.z0)
    vals = integrate_family(cs.gamma_hat, rad, p,
                            [("one", ("pow", 0)), ("one", ("pow", 1))], tol=1e-12)
    for label, got, want in (("oint dz/R", vals[0], -2j * np.pi),
                             ("oint z dz/R", vals[1], -2j * np.pi * 0.3)):
        ok = abs(got - want) < 1e-9
        failures += 0 if ok else 1
        print(f"[{'PASS' if ok else 'FAIL'}] {label}: {got:.12f}")

    p2 = ProblemParams(x=1.0, t=0.1, mu=1.8, genus=0)
    a = 0.9 * np.tanh(1.0) + 1j / np.cosh(1.0)
    rep = newton_solve(BranchpointSet((a,)), p2)
    aa = rep.alphas.upper[0]
    ok = rep.max_residual < 1e-9
    failures += 0 if ok else 1
    print(f"[{'PASS' if ok else 'FAIL'}] genus-0 solve at (x=1, t=0.1, mu=1.8): "
          f"alpha = {aa:.8f}")
    d = 1e-5
    caches = []
    for mu in (p2.mu - d, p2.mu + d):
        pv = p2.with_mu(mu)
        caches.append(MomentCache(build_contour(rep.alphas, mu),
                                  Radical(rep.alphas, pv.z0), pv, tol=1e-12))
    fd = (eval_K(caches[1], aa) - eval_K(caches[0], aa)) / (2 * d)
    pv = p2
    cache = MomentCache(build_contour(rep.alphas, pv.mu),
                        Radical(rep.alphas, pv.z0), pv, tol=1e-12)
    direct = eval_dK_dmu(cache, aa)
    ok = abs(fd - direct) < 1e-7
    failures += 0 if ok else 1
    print(f"[{'PASS' if ok else 'FAIL'}] dK/dmu vs finite difference: "
          f"|diff| = {abs(fd - direct):.2e}")
    print(f"selftest: {'OK' if failures == 0 else f'{failures} FAILURES'}")
    return EXIT_OK if failures == 0 else EXIT_NUMERIC


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rhmod",
                                 description="free-contour scalar RHP engine")
    ap.add_argument("--config", help="INI config file")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--x", type=float)
        sp.add_argument("--t", type=float)
        sp.add_argument("--mu", type=float)
        sp.add_argument("--genus", type=int)
        sp.add_argument("--seeds", help="comma-separated complex seeds")
        sp.add_argument("--json", help="JSON output path")

    sp = sub.add_parser("solve", help="solve the modulation system")
    common(sp)

    for name in ("sweep", "compare"):
        sp = sub.add_parser(name, help=f"{name} a parameter range")
        common(sp)
        sp.add_argument("--param", choices=("mu", "x", "t"))
        sp.add_argument("--lo", type=float)
        sp.add_argument("--hi", type=float)
        sp.add_argument("--step", type=float)
        sp.add_argument("--csv", help="CSV output path")
        if name == "sweep":
            sp.add_argument("--method", choices=("ode", "resolve", "both"),
                            default="resolve")

    sp = sub.add_parser("check-signs", help="sign-condition report")
    common(sp)

    sp = sub.add_parser("detect-genus", help="decide genus 0 vs 2")
    common(sp)
    sp.add_argument("--seeds0", help="genus-0 seeds")
    sp.add_argument("--seeds2", help="genus-2 seeds")

    sp = sub.add_parser("selftest", help="fast oracle suite")
    common(sp)
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    args = ap.parse_args(argv)
    cfg = None
    try:
        if args.config:
            cfg = _load_config(args.config)
        if args.command == "solve":
            return _cmd_solve(args, cfg)
        if args.command == "sweep":
            return _cmd_sweep(args, cfg)
        if args.command == "compare":
            return _cmd_sweep(args, cfg, method="both")
        if args.command == "check-signs":
            return _cmd_check_signs(args, cfg)
        if args.command == "detect-genus":
            return _cmd_detect_genus(args, cfg)
        if args.command == "selftest":
            return _cmd_selftest(args, cfg)
        raise ConfigError(f"unknown command {args.command}")
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except NearBreakError as err:
        print(f"near-break frontier: {err}", file=sys.stderr)
        return EXIT_NEAR_BREAK
    except (RhmodError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
