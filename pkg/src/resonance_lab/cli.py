"""Command-line front end: verification battery, integrations, reductions,
coefficient tables and equilibria sweeps.

Every command reads a declarative JSON config (flag overrides for seed,
workers and output directory), writes delimited text with 17 significant
digits so reruns diff byte-identically, and uses exit codes

    0  success,
    1  a verification suite failed,
    2  configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import charts, equilibria, invariants, model, normalform, verify

__all__ = ["main", "format_float"]

ENV_OUT_DIR = "RESONANCE_LAB_OUT"


def format_float(x: float) -> str:
    """17-significant-digit fixed formatting: bit-faithful round trips."""
    return format(float(x), ".17g")


class ConfigError(Exception):
    pass


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(ENV_OUT_DIR) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _grid(spec, name: str) -> np.ndarray:
    """A grid is either an explicit list or {start, stop, num}."""
    if isinstance(spec, list):
        return np.asarray(spec, dtype=float)
    if isinstance(spec, dict):
        try:
            return np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"]))
        except KeyError as exc:
            raise ConfigError(f"grid {name!r} needs start/stop/num") from exc
    raise ConfigError(f"grid {name!r} must be a list or start/stop/num object")


def _params_from_config(cfg: dict) -> model.ModelParams:
    p = cfg.get("params", {})
    h = p.get("h")
    gamma = p.get("gamma", h / 4.0 if h is not None else None)
    try:
        return model.ModelParams(
            omega=float(p.get("omega", 1.0)),
            epsilon=float(p.get("epsilon", 0.0)),
            beta=float(p.get("beta", 0.0)),
            gamma=float(gamma) if gamma is not None else None,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad params block: {exc}") from exc


def cmd_verify(args) -> int:
    cfg = _load_config(args.config)
    fault = cfg.get("inject_fault")
    names = cfg.get("suites")
    report = verify.run_suites(seed=args.seed, fault=fault, names=names)
    timings = report.pop("timings")
    out = _out_dir(args) / cfg.get("report", "verify_report.json")
    with open(out, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for suite in report["suites"]:
        status = "pass" if suite["passed"] else "FAIL"
        print(f"[{status}] {suite['name']}: max residual {suite['max_residual']:.3e} "
              f"(tol {suite['tolerance']:.1e}, {timings[suite['name']]:.1f}s)")
    if not report["passed"]:
        print("failed suites: " + ", ".join(report["failed_suites"]))
        return 1
    print(f"all suites passed; report written to {out}")
    return 0


def _initial_state(cfg: dict, p: model.ModelParams) -> model.CartesianState:
    if "state" in cfg:
        s = cfg["state"]
        try:
            return model.CartesianState(q=tuple(map(float, s["q"])), Q=tuple(map(float, s["Q"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad state block: {exc}") from exc
    if "delaunay" in cfg:
        d = cfg["delaunay"]
        if p.gamma is None:
            raise ConfigError("a Delaunay initial state needs params.h or params.gamma")
        try:
            dp = charts.DelaunayPoint(**{k: float(v) for k, v in d.items()})
        except TypeError as exc:
            raise ConfigError(f"bad delaunay block: {exc}") from exc
        return charts.delaunay_to_cartesian(dp, p.gamma)
    raise ConfigError("config needs a 'state' or 'delaunay' initial condition")


def cmd_integrate(args) -> int:
    cfg = _load_config(args.config)
    kind = cfg.get("kind", "cartesian")
    out = _out_dir(args)
    tol = float(cfg.get("tol", 1e-12))
    t_end = float(cfg.get("t_end", 100.0))
    n_out = int(cfg.get("n_out", 1000))

    if kind == "cartesian":
        p = _params_from_config(cfg)
        s0 = _initial_state(cfg, p)
        traj = model.integrate(s0, p, t_end, tol, n_out=n_out)
        path = out / cfg.get("out", "trajectory.csv")
        traj.write_csv(path)
        print(f"wrote {path} (max drift: H {traj.energy_drift:.3e}, "
              f"Xi {traj.xi_drift:.3e}, L1 {traj.l1_drift:.3e})")
        return 0

    if kind == "reduced":
        ivc = cfg.get("integrals")
        if not ivc:
            raise ConfigError("reduced runs need an 'integrals' block {n, xi, l}")
        try:
            iv = model.IntegralValues(n=float(ivc["n"]), xi=float(ivc["xi"]), l=float(ivc["l"]))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad integrals block: {exc}") from exc
        beta = float(cfg.get("params", {}).get("beta", 0.0))
        if "reduced_state" in cfg:
            rs = cfg["reduced_state"]
            pt0 = invariants.ThriceReducedPoint(
                M=0.5 * (iv.n ** 2 + iv.xi ** 2 - float(rs["K"]) ** 2 - iv.l ** 2),
                N=float(rs["N"]), Z=iv.n * iv.xi - float(rs["K"]) * iv.l,
                S=float(rs["S"]), K=float(rs["K"]), integrals=iv)
        else:
            lo, hi = invariants.feasible_interval(iv)
            pt0 = invariants.reduced_point_on_surface(
                0.5 * (lo + hi), iv, beta, angle=float(cfg.get("angle", 0.0)))
        traj = invariants.reduced_flow(pt0, beta, t_end, tol, n_out=n_out)
        path = out / cfg.get("out", "reduced_trajectory.csv")
        traj.write_csv(path)
        print(f"wrote {path} (casimir drift {traj.casimir_drift:.3e}, "
              f"H3 drift {traj.h3_drift:.3e})")
        return 0

    if kind == "normalized":
        p = _params_from_config(cfg)
        if p.gamma is None:
            raise ConfigError("normalized runs need params.h or params.gamma")
        d = cfg.get("delaunay")
        if not d:
            raise ConfigError("normalized runs need a 'delaunay' initial point")
        dp0 = charts.DelaunayPoint(**{k: float(v) for k, v in d.items()})
        order = int(cfg.get("order", 1))
        from scipy.integrate import solve_ivp

        def fun(t, y):
            dp = charts.DelaunayPoint(ell=y[0], g=y[1], u1=y[2], u3=y[3],
                                      L=dp0.L, G=y[4], U1=dp0.U1, U3=dp0.U3)
            tan = normalform.normalized_rhs(dp, p, order=order)
            return [tan.ell, tan.g, tan.u1, tan.u3, tan.G]

        sol = solve_ivp(fun, (0.0, t_end), [dp0.ell, dp0.g, dp0.u1, dp0.u3, dp0.G],
                        method="DOP853", rtol=tol, atol=tol,
                        t_eval=np.linspace(0.0, t_end, n_out))
        if not sol.success:
            print(f"integration failed: {sol.message}", file=sys.stderr)
            return 1
        path = out / cfg.get("out", "normalized_trajectory.csv")
        with open(path, "w") as fh:
            fh.write("t,ell,g,u1,u3,L,G,U1,U3\n")
            for k in range(len(sol.t)):
                row = [sol.t[k], sol.y[0][k], sol.y[1][k], sol.y[2][k], sol.y[3][k],
                       dp0.L, sol.y[4][k], dp0.U1, dp0.U3]
                fh.write(",".join(format_float(v) for v in row) + "\n")
        print(f"wrote {path}")
        return 0

    raise ConfigError(f"unknown integrate kind: {kind!r}")


def cmd_reduce(args) -> int:
    cfg = _load_config(args.config)
    out = _out_dir(args)
    wrote = []
    if "state" in cfg:
        s = model.CartesianState(q=tuple(map(float, cfg["state"]["q"])),
                                 Q=tuple(map(float, cfg["state"]["Q"])))
        pv = invariants.pi_map(s)
        kv = invariants.klj_map(pv)
        pt = invariants.thrice_map(kv)
        r1, r2 = invariants.second_space_residuals(kv)
        payload = {
            "pi": {f"pi{i}": getattr(pv, f"pi{i}") for i in range(1, 17)},
            "klj": {k: getattr(kv, k) for k in
                    ("h2", "xi", "k1", "k2", "k3", "l1", "l2", "l3",
                     "j1", "j2", "j3", "j4", "j5", "j6", "j7", "j8")},
            "thrice": {"M": pt.M, "N": pt.N, "Z": pt.Z, "S": pt.S, "K": pt.K,
                       "n": pt.integrals.n, "xi": pt.integrals.xi, "l": pt.integrals.l},
            "second_space_residuals": [r1, r2],
            "eo3_residuals": list(invariants.eo3_residuals(pt)),
        }
        path = out / cfg.get("out", "invariants.json")
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        wrote.append(path)
    if "integrals" in cfg:
        ivc = cfg["integrals"]
        try:
            iv = model.IntegralValues(n=float(ivc["n"]), xi=float(ivc["xi"]), l=float(ivc["l"]))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad integrals block: {exc}") from exc
        samples = invariants.surface_samples(iv, count=int(cfg.get("count", 200)))
        path = out / cfg.get("surface_out", "surface.csv")
        with open(path, "w") as fh:
            fh.write("K,sqrt_f_over_2\n")
            for K, r in samples:
                fh.write(format_float(K) + "," + format_float(r) + "\n")
        wrote.append(path)
    if not wrote:
        raise ConfigError("reduce needs a 'state' and/or an 'integrals' block")
    for path in wrote:
        print(f"wrote {path}")
    return 0


def cmd_nf_table(args) -> int:
    cfg = _load_config(args.config)
    out = _out_dir(args)
    gamma = float(cfg.get("gamma", cfg.get("h", 4.0) / 4.0 if "h" in cfg else 1.0))
    betas = _grid(cfg.get("beta_grid", [0.0, 1.0, math.sqrt(2.0)]), "beta_grid")
    Ls = _grid(cfg.get("L_grid", [1.0]), "L_grid")
    etas = _grid(cfg.get("eta_grid", [0.6, 0.8]), "eta_grid")
    c1s = _grid(cfg.get("c1_grid", [0.0, 0.4]), "c1_grid")
    c2s = _grid(cfg.get("c2_grid", [0.0, 0.4]), "c2_grid")
    path = out / cfg.get("out", "nf_table.csv")
    with open(path, "w") as fh:
        fh.write("beta,L,G,U1,U3,C01,C11,C21,C02,C12,C22,C32,C42\n")
        for beta in betas:
            for L in Ls:
                for eta in etas:
                    G = eta * L
                    for c1 in c1s:
                        for c2 in c2s:
                            U1 = c1 * G
                            U3 = c2 * G
                            c = normalform.order1_coeffs(L, G, U1, U3, beta, gamma)
                            c2v = normalform.order2_coeffs(L, G, U1, U3, beta, gamma)
                            row = [beta, L, G, U1, U3, c.C01, c.C11, c.C21,
                                   c2v.C02, c2v.C12, c2v.C22, c2v.C32, c2v.C42]
                            fh.write(",".join(format_float(v) for v in row) + "\n")
    print(f"wrote {path}")
    return 0


def cmd_equilibria(args) -> int:
    cfg = _load_config(args.config)
    out = _out_dir(args)
    alphas = _grid(cfg.get("alpha_grid", [0.0, 1.0]), "alpha_grid")
    ws = _grid(cfg.get("w_grid", [0.0]), "w_grid")
    zs = _grid(cfg.get("z_grid", [0.0]), "z_grid")
    result = equilibria.sweep(alphas, ws, zs, workers=args.workers)
    path = out / cfg.get("out", "equilibria_sweep.csv")
    result.to_csv(path)
    wrote = [path]
    if cfg.get("json_out"):
        jpath = out / cfg["json_out"]
        with open(jpath, "w") as fh:
            json.dump(result.to_json(), fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
        wrote.append(jpath)
    if cfg.get("cross_validate", True):
        bad = 0
        total = 0
        for alpha in alphas:
            if alpha < -1.0:
                continue
            beta = math.sqrt(alpha + 1.0)
            for w in ws:
                for z in zs:
                    res = equilibria.solve_tori3(float(w), float(z), float(alpha))
                    for rec in res.records:
                        cv = equilibria.cross_validate(rec, beta)
                        total += 1
                        if cv.reduced_rhs_max > 1e-6:
                            bad += 1
        print(f"cross-validated {total} records, {bad} above tolerance")
    errors = sum(1 for row in result.rows if row["kind"] == "error")
    for path in wrote:
        print(f"wrote {path}")
    if errors and errors == len(result.rows):
        print("every cell failed", file=sys.stderr)
        return 1
    return 0


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="resonance-lab",
        description="Reduction, averaging and relative equilibria of perturbed "
                    "4-D isotropic oscillators.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in (("verify", cmd_verify), ("integrate", cmd_integrate),
                     ("reduce", cmd_reduce), ("nf-table", cmd_nf_table),
                     ("equilibria", cmd_equilibria)):
        sp = sub.add_parser(name)
        sp.set_defaults(func=fn)
        sp.add_argument("--config", help="JSON config file", default=None)
        sp.add_argument("--seed", type=int, default=0,
                        help="seed for randomized suites")
        sp.add_argument("--workers", type=int, default=1,
                        help="worker processes for sweeps")
        sp.add_argument("--out", default=None,
                        help=f"output directory (default: ${ENV_OUT_DIR} or '.')")
    return ap


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        ap.print_usage(sys.stderr)
        return 2
    except (charts.ChartDomainError, invariants.EmptyReducedSpaceError, ValueError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
