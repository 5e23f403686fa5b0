"""Command-line entry point: solve, bounds, bifurcate, verify.

Configuration comes from an optional JSON file (--config) with flags taking
precedence.  Every output file embeds the sha256 digest of the effective
config; identical config and build give byte-identical CSV/JSON outputs.

Exit codes: 0 ok, 1 hard failure, 2 merged solutions, 3 no bifurcation,
64 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import continuation as co
from . import plots
from .fields import EUCLIDEAN, SPLIT, GridParams, save_vectorfield
from .solver import DivergenceError, assemble_solutions
from .tridiag import certify_bounds
from .verify import run_checks

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_MERGED = 2
EXIT_NO_BIFURCATION = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def config_digest(cfg: dict) -> str:
    """Provenance digest over the computational part of the config.

    The output destination and figure toggles do not change the numbers, so
    they are excluded: identical computations get identical digests.
    """
    payload = {k: v for k, v in cfg.items() if k not in ("out", "svg")}
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def _dump_json(obj: dict, path: Path, digest: str) -> None:
    obj = dict(obj)
    obj["config_digest"] = digest
    path.write_text(json.dumps(obj, sort_keys=True, indent=1))


def _merge_config(args, keys) -> dict:
    cfg = {}
    if getattr(args, "config", None):
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
        if not isinstance(raw, dict):
            raise UsageError("config must be a JSON object")
        unknown = set(raw) - set(keys)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(raw)
    for key in keys:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            cfg[key] = val
    return cfg


def _floats(text: str) -> list:
    try:
        vals = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    return vals


def _ints(text: str) -> list:
    return [int(v) for v in _floats(text)]


# ---------------------------------------------------------------------------
# solve


def cmd_solve(args) -> int:
    keys = ["m", "n", "lambda", "variant", "max_iter", "tol", "out"]
    cfg = _merge_config(args, keys)
    for req in ("m", "n", "lambda", "out"):
        if cfg.get(req) is None:
            raise UsageError(f"solve requires --{req}")
    cfg.setdefault("variant", SPLIT)
    cfg.setdefault("max_iter", 100)
    cfg.setdefault("tol", None)
    digest = config_digest(cfg)
    params = GridParams(int(cfg["n"]), float(cfg["m"]), float(cfg["lambda"]), cfg["variant"])
    outdir = Path(cfg["out"])
    outdir.mkdir(parents=True, exist_ok=True)

    try:
        sol = assemble_solutions(params, max_iter=int(cfg["max_iter"]), tol=cfg["tol"])
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_FAIL

    meta = {
        "config_digest": digest,
        "iterations": len(sol.trace.steps),
        "final_diff": sol.trace.steps[-1]["diff_l1_1"] if sol.trace.steps else 0.0,
        "status": sol.status,
        "apriori_report": sol.apriori.to_dict(),
    }
    save_vectorfield(sol.u1, outdir / "solution1.json",
                     metadata={**meta, "residual_l1": sol.residual1_l1})
    save_vectorfield(sol.u2, outdir / "solution2.json",
                     metadata={**meta, "residual_l1": sol.residual2_l1})
    _dump_json(sol.trace.to_dict(), outdir / "trace.json", digest)
    _dump_json(
        {**sol.apriori.to_dict(), "separation_l1": sol.separation_l1, "status": sol.status},
        outdir / "apriori.json",
        digest,
    )
    if sol.trace.steps:
        plots.save_trace_figure(sol.trace, outdir / "convergence.png",
                                metadata={"config_digest": digest})
    print(f"status: {sol.status}  separation_l1: {sol.separation_l1:.6g}  "
          f"residuals: {sol.residual1_l1:.3e} {sol.residual2_l1:.3e}")
    if sol.status == "merged":
        return EXIT_MERGED
    return EXIT_OK


# ---------------------------------------------------------------------------
# bounds


def cmd_bounds(args) -> int:
    keys = ["m", "l", "lambdas", "n", "slope_tol", "out"]
    cfg = _merge_config(args, keys)
    for key in ("m", "l", "lambdas", "n"):
        if isinstance(cfg.get(key), (int, float)):
            cfg[key] = [cfg[key]]
    for req in ("m", "l", "lambdas", "n", "out"):
        if cfg.get(req) is None or cfg.get(req) == []:
            raise UsageError(f"bounds requires a non-empty --{req}")
    cfg.setdefault("slope_tol", 0.05)
    digest = config_digest(cfg)
    if any(lam <= 1 for lam in cfg["lambdas"]):
        raise UsageError("bounds requires every lambda > 1")

    grid = []
    for m in cfg["m"]:
        for l in cfg["l"]:
            for N in cfg["n"]:
                for lam in cfg["lambdas"]:
                    grid.append((GridParams(int(N), float(m), float(lam)), int(l)))
    report = certify_bounds(grid, slope_tol=float(cfg["slope_tol"]))

    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    _dump_json(report.to_dict(), out, digest)
    csv_path = out.with_suffix(".csv")
    with open(csv_path, "w") as fh:
        fh.write(f"# config_digest={digest}\n")
        fh.write("l,m,lambda,N,max_entry,bound,l1_norm,grad_norm,pass\n")
        for pt in report.points:
            fh.write(
                f"{pt['l']},{pt['m']!r},{pt['lambda']!r},{pt['N']},{pt['max_entry']!r},"
                f"{pt['bound']!r},{pt['l1_norm']!r},{pt['grad_norm']!r},{str(pt['pass']).lower()}\n"
            )
    plots.save_bounds_figure(report, out.with_suffix(".png"),
                             metadata={"config_digest": digest})
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if not report.overall_pass:
        for pt in report.points:
            if not pt["pass"]:
                print(f"hard bound violation at {pt}", file=sys.stderr)
        return EXIT_FAIL
    print(f"bounds: {len(report.points)} grid points pass; report at {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bifurcate


def cmd_bifurcate(args) -> int:
    keys = ["m", "n", "lambda_min", "lambda_max", "step", "variant", "svg", "out"]
    cfg = _merge_config(args, keys)
    for req in ("m", "n", "lambda_max", "out"):
        if cfg.get(req) is None:
            raise UsageError(f"bifurcate requires --{req.replace('_', '-')}")
    cfg.setdefault("lambda_min", 0.0)
    cfg.setdefault("step", 0.1)
    cfg.setdefault("variant", SPLIT)
    cfg.setdefault("svg", False)
    digest = config_digest(cfg)
    params = GridParams(int(cfg["n"]), float(cfg["m"]), 0.0, cfg["variant"])
    lam_range = (float(cfg["lambda_min"]), float(cfg["lambda_max"]))
    if lam_range[1] <= lam_range[0]:
        raise UsageError("lambda-max must exceed lambda-min")
    opts = co.StepOptions(initial=float(cfg["step"]))
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)

    symmetric = co.continue_branch(params, lam_range, opts)
    branches = [symmetric]
    lambda0 = None
    try:
        lambda0 = co.detect_pitchfork(symmetric, params, step_opts=opts)
    except co.NoBifurcationError:
        pass

    if lambda0 is not None:
        at = next(pt for pt in symmetric.points if pt.lam >= lambda0)
        plus = minus = None
        lam_switch = lambda0 + 1e-3
        if lam_switch < lam_range[1]:
            p_sw = params.with_lambda(lam_switch)
            u_sw = co.newton_refine(
                at.u.with_params(p_sw), p_sw, tol=1e-10 * max(1.0, lam_switch)
            )
            at_sw = co._make_point(u_sw, p_sw)
            # perturbation sizes: the switch_branch default first, then the
            # sqrt law of a supercritical pitchfork, then a fraction of lambda
            for delta in (None, 3.0 * np.sqrt(lam_switch - lambda0), 0.2 * lam_switch):
                try:
                    plus, minus = co.switch_branch(
                        at_sw, params, lam_range[1], opts, delta=delta
                    )
                    break
                except (RuntimeError, np.linalg.LinAlgError):
                    continue
        if plus is not None:
            branches.extend([plus, minus])
        else:
            print("warning: branch switching failed; emitting the symmetric branch only",
                  file=sys.stderr)

    co.emit_diagram(branches, out, config_digest=digest)
    manifest = {
        "params": {"N": params.N, "m": params.m, "variant": params.variant},
        "lambda_range": list(lam_range),
        "step_opts": {"initial": opts.initial, "min_step": opts.min_step},
        "detected_lambda0": lambda0,
        "branches": [b.id for b in branches],
    }
    _dump_json(manifest, out.with_suffix(".manifest.json"), digest)
    fig_meta = {"config_digest": digest}
    plots.save_bifurcation_figure(branches, out.with_suffix(".png"), lambda0=lambda0,
                                  metadata=fig_meta)
    if cfg["svg"]:
        plots.save_bifurcation_figure(branches, out.with_suffix(".svg"), lambda0=lambda0,
                                      metadata=fig_meta)
    if lambda0 is None:
        print("no bifurcation detected in range", file=sys.stderr)
        return EXIT_NO_BIFURCATION
    print(f"detected lambda0 = {lambda0:.6f}; diagram at {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    keys = ["seed", "fast"]
    cfg = _merge_config(args, keys)
    cfg.setdefault("seed", 0)
    cfg.setdefault("fast", False)
    results = run_checks(seed=int(cfg["seed"]), fast=bool(cfg["fast"]))
    all_ok = True
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        all_ok = all_ok and ok
    return EXIT_OK if all_ok else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="burgers2d", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="construct the two solutions at fixed lambda")
    ps.add_argument("--config")
    ps.add_argument("--m", type=float)
    ps.add_argument("--n", type=int)
    ps.add_argument("--lambda", dest="lambda_", type=float)
    ps.add_argument("--variant", choices=[SPLIT, EUCLIDEAN])
    ps.add_argument("--max-iter", type=int)
    ps.add_argument("--tol", type=float)
    ps.add_argument("--out")
    ps.set_defaults(fn=cmd_solve)

    pb = sub.add_parser("bounds", help="certify inverse bounds over a grid")
    pb.add_argument("--config")
    pb.add_argument("--m", type=_floats)
    pb.add_argument("--l", type=_ints)
    pb.add_argument("--lambdas", type=_floats)
    pb.add_argument("--n", type=_ints)
    pb.add_argument("--slope-tol", type=float)
    pb.add_argument("--out")
    pb.set_defaults(fn=cmd_bounds)

    pf = sub.add_parser("bifurcate", help="trace branches and detect the pitchfork")
    pf.add_argument("--config")
    pf.add_argument("--m", type=float)
    pf.add_argument("--n", type=int)
    pf.add_argument("--lambda-min", type=float)
    pf.add_argument("--lambda-max", type=float)
    pf.add_argument("--step", type=float)
    pf.add_argument("--variant", choices=[SPLIT, EUCLIDEAN])
    pf.add_argument("--svg", action="store_true", default=None)
    pf.add_argument("--out")
    pf.set_defaults(fn=cmd_bifurcate)

    pv = sub.add_parser("verify", help="run the property suite")
    pv.add_argument("--config")
    pv.add_argument("--seed", type=int)
    pv.add_argument("--fast", action="store_true", default=None)
    pv.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if hasattr(args, "lambda_"):
            setattr(args, "lambda", args.lambda_)
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
