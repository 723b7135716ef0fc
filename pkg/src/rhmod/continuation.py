"""Branchpoint evolution in mu (and x, t): ODE integration vs re-solving.

The evolution equations are

    dalpha_j/dpar = -2 pi i (dK/dpar)(alpha_j) /
                    ( D * oint f'/((zeta - alpha_j) R) dzeta ),

with dK/dmu the determinant with the f_mu-row and dK/dx, dK/dt the ones with
the -zeta and -2 zeta^2 rows.  The 'ode' method integrates them with the
classical fourth-order one-step scheme at fixed step; 'resolve' re-solves the
modulation system per grid point; 'both' runs the two and records the
pointwise differences.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import NearBreakError
from .geometry import BranchpointSet, Radical, build_contour
from .modulation import SolveReport, newton_solve
from .params import ProblemParams
from .rhp_core import (MomentCache, determinant_D, eval_dK_dmu, eval_K,
                       solve_constants, solve_constants_mu)

_ROW_WEIGHT = {"mu": "f_mu", "x": "neg_zeta", "t": "neg_2zeta_sq"}


def _with_param(p: ProblemParams, param: str, value: float) -> ProblemParams:
    if param == "mu":
        return p.with_mu(value)
    if param == "x":
        return p.with_xt(value, p.t)
    if param == "t":
        return p.with_xt(p.x, value)
    raise KeyError(param)


def _param_value(p: ProblemParams, param: str) -> float:
    return {"mu": p.mu, "x": p.x, "t": p.t}[param]


def dalpha_dparam(bps: BranchpointSet, p: ProblemParams, param: str = "mu",
                  quad_tol: Optional[float] = None,
                  cache: Optional[MomentCache] = None) -> np.ndarray:
    """dalpha_j/dparam for the upper representatives at a solved configuration."""
    if cache is None:
        cs = build_contour(bps, p.mu)
        rad = Radical(bps, p.z0)
        cache = MomentCache(cs, rad, p,
                            tol=quad_tol if quad_tol is not None else p.tols.quad_tol)
    D = determinant_D(cache)
    weight = _ROW_WEIGHT[param]
    out = np.empty(len(bps.upper), dtype=complex)
    scale = max(np.max(np.abs(bps.as_array())), 1.0)
    for i, a in enumerate(bps.upper):
        from .rhp_core import _cauchy_column, _k_determinant
        col = _cauchy_column(cache, a, weight)
        dK = _k_determinant(cache, col, weight)
        den = D * cache.get(("hat", 0), "f_prime", ("cauchy", a))
        if abs(den) < 1e-6 * abs(D) * scale:
            raise NearBreakError(f"evolution denominator {abs(den):.2e} too "
                                 f"small at alpha_{2 * i}")
        out[i] = -2j * math.pi * dK / den
    return out


def dalpha_dmu(bps: BranchpointSet, p: ProblemParams, **kw) -> np.ndarray:
    return dalpha_dparam(bps, p, "mu", **kw)


def dalpha_dx(bps: BranchpointSet, p: ProblemParams, **kw) -> np.ndarray:
    return dalpha_dparam(bps, p, "x", **kw)


def dalpha_dt(bps: BranchpointSet, p: ProblemParams, **kw) -> np.ndarray:
    return dalpha_dparam(bps, p, "t", **kw)


@dataclass
class TraceSample:
    param: float
    alphas: Tuple[complex, ...]
    dalpha: Tuple[complex, ...]
    W: Tuple[float, ...]
    Omega: Tuple[float, ...]
    dW: Tuple[float, ...]
    dOmega: Tuple[float, ...]
    residual: float
    method: str
    sign_pass: Optional[bool] = None


@dataclass
class ContinuationTrace:
    param_name: str
    x: float
    t: float
    genus: int
    samples: List[TraceSample] = field(default_factory=list)
    method: str = "resolve"

    def by_method(self, method: str) -> List[TraceSample]:
        return [s for s in self.samples if s.method == method]

    def max_method_gap(self) -> float:
        """max_j max_param |alpha_j(ode) - alpha_j(resolve)|."""
        ode = {s.param: s for s in self.by_method("ode")}
        res = {s.param: s for s in self.by_method("resolve")}
        gaps = [np.max(np.abs(np.array(ode[k].alphas) - np.array(res[k].alphas)))
                for k in ode if k in res]
        return float(max(gaps)) if gaps else math.nan

    # ---- serialization ----

    def csv_text(self) -> str:
        n = self.genus // 2 * 2 + 1
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        hdr = ["method", "param"]
        for i in range(n):
            hdr += [f"alpha{2*i}_re", f"alpha{2*i}_im"]
        for i in range(n):
            hdr += [f"dalpha{2*i}_re", f"dalpha{2*i}_im"]
        npair = self.genus // 2
        for i in range(npair):
            hdr += [f"W{i+1}"]
        for i in range(npair):
            hdr += [f"Omega{i+1}"]
        for i in range(npair):
            hdr += [f"dW{i+1}"]
        for i in range(npair):
            hdr += [f"dOmega{i+1}"]
        hdr += ["residual"]
        w.writerow(hdr)
        fmt = lambda v: format(float(v), ".17g")
        for s in self.samples:
            row = [s.method, fmt(s.param)]
            for a in s.alphas:
                row += [fmt(a.real), fmt(a.imag)]
            for a in s.dalpha:
                row += [fmt(a.real), fmt(a.imag)]
            row += [fmt(v) for v in s.W]
            row += [fmt(v) for v in s.Omega]
            row += [fmt(v) for v in s.dW]
            row += [fmt(v) for v in s.dOmega]
            row += [fmt(s.residual)]
            w.writerow(row)
        return buf.getvalue()

    @staticmethod
    def parse_csv_row(header: Sequence[str], row: Sequence[str]) -> TraceSample:
        rec = dict(zip(header, row))
        alphas, dalpha, W, Om, dW, dOm = [], [], [], [], [], []
        i = 0
        while f"alpha{2*i}_re" in rec:
            alphas.append(complex(float(rec[f"alpha{2*i}_re"]),
                                  float(rec[f"alpha{2*i}_im"])))
            dalpha.append(complex(float(rec[f"dalpha{2*i}_re"]),
                                  float(rec[f"dalpha{2*i}_im"])))
            i += 1
        i = 1
        while f"W{i}" in rec:
            W.append(float(rec[f"W{i}"]))
            Om.append(float(rec[f"Omega{i}"]))
            dW.append(float(rec[f"dW{i}"]))
            dOm.append(float(rec[f"dOmega{i}"]))
            i += 1
        return TraceSample(float(rec["param"]), tuple(alphas), tuple(dalpha),
                           tuple(W), tuple(Om), tuple(dW), tuple(dOm),
                           float(rec["residual"]), rec["method"])

    def json_text(self) -> str:
        obj = {
            "schema": 1,
            "param": self.param_name,
            "x": self.x, "t": self.t, "genus": self.genus,
            "method": self.method,
            "samples": [{
                "method": s.method,
                "param": s.param,
                "alphas": [[a.real, a.imag] for a in s.alphas],
                "dalpha": [[a.real, a.imag] for a in s.dalpha],
                "W": list(s.W), "Omega": list(s.Omega),
                "dW": list(s.dW), "dOmega": list(s.dOmega),
                "residual": s.residual,
                "sign_pass": s.sign_pass,
            } for s in self.samples],
        }
        return json.dumps(obj, indent=1)


def _sample_at(bps: BranchpointSet, p: ProblemParams, param: str, value: float,
               method: str, residual: float, quad_tol: float) -> TraceSample:
    cs = build_contour(bps, p.mu)
    rad = Radical(bps, p.z0)
    cache = MomentCache(cs, rad, p, tol=quad_tol)
    W, Om = solve_constants(cache, realness_tol=p.tols.realness_tol)
    dW, dOm = solve_constants_mu(cache, realness_tol=p.tols.realness_tol)
    da = dalpha_dparam(bps, p, param, cache=cache)
    return TraceSample(value, tuple(bps.upper), tuple(da), tuple(W), tuple(Om),
                       tuple(dW), tuple(dOm), residual, method)


def _rk4_step(uppers: np.ndarray, p: ProblemParams, param: str, value: float,
              step: float, quad_tol: float) -> np.ndarray:
    def rhs(vec, v):
        pv = _with_param(p, param, v)
        return dalpha_dparam(BranchpointSet(tuple(vec)), pv, param,
                             quad_tol=quad_tol)
    k1 = rhs(uppers, value)
    k2 = rhs(uppers + 0.5 * step * k1, value + 0.5 * step)
    k3 = rhs(uppers + 0.5 * step * k2, value + 0.5 * step)
    k4 = rhs(uppers + step * k3, value + step)
    return uppers + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def sweep(param: str, lo: float, hi: float, step: float, method: str,
          p0: ProblemParams, seed: BranchpointSet,
          polish_every: int = 0, quad_tol: Optional[float] = None,
          tol_K: Optional[float] = None) -> ContinuationTrace:
    """Sweep one parameter with the requested method(s).

    method = 'resolve' | 'ode' | 'both'.  The ODE path never polishes unless
    polish_every > 0.  A zero-length range yields the single starting sample.
    """
    if method not in ("ode", "resolve", "both"):
        raise ValueError(f"unknown sweep method {method!r}")
    quad_tol = p0.tols.quad_tol if quad_tol is None else quad_tol
    tol_K = p0.tols.tol_k if tol_K is None else tol_K
    direction = 1.0 if hi >= lo else -1.0
    nsteps = max(0, int(round(abs(hi - lo) / step)))
    values = [lo + direction * step * k for k in range(nsteps + 1)]

    p_start = _with_param(p0, param, lo)
    rep0 = newton_solve(seed, p_start, tol_K=tol_K, quad_tol=quad_tol)
    trace = ContinuationTrace(param, p0.x, p0.t, seed.genus, method=method)

    if method in ("resolve", "both"):
        bps = rep0.alphas
        for v in values:
            pv = _with_param(p0, param, v)
            rep = newton_solve(bps, pv, tol_K=tol_K, quad_tol=quad_tol) \
                if v != lo else rep0
            bps = rep.alphas
            trace.samples.append(_sample_at(bps, pv, param, v, "resolve",
                                            rep.max_residual, quad_tol))
    if method in ("ode", "both"):
        uppers = rep0.alphas.as_array()
        for k, v in enumerate(values):
            pv = _with_param(p0, param, v)
            bps_v = BranchpointSet(tuple(uppers))
            res = float(np.max(np.abs([
                eval_K(MomentCache(build_contour(bps_v, pv.mu),
                                   Radical(bps_v, pv.z0), pv, tol=quad_tol), a)
                for a in bps_v.upper])))
            trace.samples.append(_sample_at(bps_v, pv, param, v, "ode", res,
                                            quad_tol))
            if k < len(values) - 1:
                uppers = _rk4_step(uppers, p0, param, v, direction * step,
                                   quad_tol)
                if polish_every and (k + 1) % polish_every == 0:
                    rep = newton_solve(BranchpointSet(tuple(uppers)),
                                       _with_param(p0, param, values[k + 1]),
                                       tol_K=tol_K, quad_tol=quad_tol)
                    uppers = rep.alphas.as_array()
    return trace
