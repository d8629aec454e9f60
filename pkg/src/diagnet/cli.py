"""Command-line harness: simulate trajectories, solve margin problems,
trace penalty paths, run sweeps, and check the support-stability condition.

Every command is a thin adapter around the library: parse, dispatch,
serialize.  Outputs embed the fully resolved configuration (CSV header
comments and a "config" key in JSON mirrors) so runs are reproducible from
their own artifacts.  Floats in CSV are written with 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import data as data_mod
from . import dynamics, margins, regimes
from .penalty import PenaltySpec


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _load_config(path):
    if path is None:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _resolve(args, config, keys):
    """Flag value if given on the command line, else config file, else the
    argparse default."""
    out = {}
    for key in keys:
        flag_val = getattr(args, key)
        if flag_val is not None:
            out[key] = flag_val
        elif key in config:
            out[key] = config[key]
        else:
            out[key] = None
    return out


def resolve_dataset(spec: str) -> data_mod.Dataset:
    """A dataset reference: a json/csv path, "bundled:<name>",
    "random:<n>,<d>,<seed>", or "sparse:<n>,<d>,<seed>"."""
    if spec.startswith("bundled:"):
        return data_mod.bundled_dataset(spec.split(":", 1)[1])
    if spec.startswith("random:"):
        n, d, seed = (int(v) for v in spec.split(":", 1)[1].split(","))
        return data_mod.random_uniform_dataset(n, d, seed)
    if spec.startswith("sparse:"):
        n, d, seed = (int(v) for v in spec.split(":", 1)[1].split(","))
        return data_mod.sparse_random_dataset(n, d, seed)
    return data_mod.load_dataset(spec)


def _write_csv(path: Path, header_lines, columns, rows):
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _trajectory_tables(records, metric_names):
    d = len(records[0].w)
    columns = ["step", "log_flow_time", "gamma", "gamma_tilde"]
    columns += [f"w_{i}" for i in range(d)]
    columns += list(metric_names)
    rows = []
    dicts = []
    for rec in records:
        row = [rec.step, rec.log_flow_time, rec.gamma, rec.gamma_tilde]
        row += [float(v) for v in rec.w]
        row += [rec.metrics.get(m) for m in metric_names]
        rows.append(row)
        dicts.append({
            "step": rec.step,
            "log_flow_time": rec.log_flow_time,
            "gamma": rec.gamma,
            "gamma_tilde": rec.gamma_tilde,
            "w": rec.w.tolist(),
            "s_accum": rec.s_accum.tolist(),
            "metrics": rec.metrics,
        })
    return columns, rows, dicts


def _out_dir(path_str) -> Path:
    out = Path(path_str if path_str else ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    opts = _resolve(args, config, [
        "data", "depth", "alpha", "eta", "mode", "gamma_tilde", "mu",
        "max_steps", "record_every", "metrics", "out", "seed",
    ])
    if opts["data"] is None:
        print("simulate: --data is required", file=sys.stderr)
        return 2
    depth = int(opts["depth"] if opts["depth"] is not None else 2)
    alpha = float(opts["alpha"] if opts["alpha"] is not None else 1.0)
    mode = opts["mode"] or "normalized_gd"
    dataset = resolve_dataset(opts["data"])
    if opts["gamma_tilde"] is not None:
        rule = regimes.StoppingRule("fixed_gamma_tilde",
                                    float(opts["gamma_tilde"]))
    elif opts["mu"] is not None:
        rule = regimes.StoppingRule("mu_scaled", float(opts["mu"]))
    else:
        print("simulate: need --gamma-tilde or --mu", file=sys.stderr)
        return 2
    target = regimes.schedule_target(alpha, depth, rule)
    eta = float(opts["eta"]) if opts["eta"] is not None else \
        regimes.suggest_eta(dataset, depth, alpha)
    metric_names = tuple(
        m for m in (opts["metrics"] or "").split(",") if m
    )
    resolved = {
        "command": "simulate", "data": opts["data"], "depth": depth,
        "alpha": alpha, "eta": eta, "mode": mode, "rule_kind": rule.kind,
        "rule_value": rule.value, "gamma_tilde_target": target,
        "max_steps": int(opts["max_steps"] or 5_000_000),
        "record_every": int(opts["record_every"] or 100),
        "metrics": list(metric_names), "seed": opts["seed"],
    }
    cfg = dynamics.StepperConfig(
        eta=eta, mode=mode, max_steps=resolved["max_steps"],
        record_every=resolved["record_every"], gamma_tilde_target=target,
    )
    records = dynamics.run(
        dynamics.init_params(dataset.n_features, depth, alpha), dataset, cfg,
        metrics=metric_names,
    )
    out = _out_dir(opts["out"])
    columns, rows, dicts = _trajectory_tables(records, metric_names)
    _write_csv(out / "trajectory.csv", [json.dumps(resolved)], columns, rows)
    (out / "trajectory.json").write_text(
        json.dumps({"config": resolved, "records": dicts}))
    print(f"simulate: {len(records)} records, final gamma_tilde "
          f"{_fmt(records[-1].gamma_tilde)} -> {out / 'trajectory.csv'}")
    return 0


def cmd_solve(args) -> int:
    dataset = resolve_dataset(args.data)
    objective = args.objective
    if objective == "l2":
        sol = margins.l2_max_margin(dataset)
    elif objective == "l1":
        sol = margins.l1_max_margin(dataset)
    elif objective == "qmu":
        if args.mu is None:
            print("solve: qmu needs --mu", file=sys.stderr)
            return 2
        sol = margins.q_mu_max_margin(
            dataset, PenaltySpec(int(args.depth or 2), float(args.mu)))
    elif objective == "lqd":
        depth = int(args.depth or 3)
        w0 = margins.l1_max_margin(dataset).w if args.w0 is None else \
            np.array(json.loads(args.w0), dtype=float)
        sol = margins.lp_quasi_stationary(dataset, depth, w0)
    else:
        print(f"solve: unknown objective {objective}", file=sys.stderr)
        return 2
    payload = sol.to_json_dict()
    payload["config"] = {
        "command": "solve", "data": args.data, "objective": objective,
        "mu": args.mu, "depth": args.depth,
    }
    out = _out_dir(args.out)
    path = out / f"solution_{objective}.json"
    path.write_text(json.dumps(payload))
    print(f"solve[{objective}]: w = "
          f"[{', '.join(_fmt(float(v)) for v in sol.w)}], objective = "
          f"{_fmt(sol.objective)}, unique_hint = {sol.unique_hint} "
          f"-> {path}")
    return 0


def _parse_mu_grid(text: str):
    if text.startswith("log:"):
        lo, hi, count = text.split(":", 1)[1].split(",")
        return list(np.logspace(float(lo), float(hi), int(count))[::-1]
                    if float(lo) < float(hi)
                    else np.logspace(float(lo), float(hi), int(count)))
    return [float(v) for v in text.split(",")]


def cmd_path(args) -> int:
    dataset = resolve_dataset(args.data)
    mu_grid = _parse_mu_grid(args.mu_grid)
    depth = int(args.depth or 2)
    sols = margins.q_path(dataset, depth, mu_grid)
    resolved = {"command": "path", "data": args.data, "depth": depth,
                "mu_grid": mu_grid}
    d = dataset.n_features
    columns = ["mu", "objective"] + [f"w_{i}" for i in range(d)]
    rows = [[mu, s.objective] + [float(v) for v in s.w]
            for mu, s in zip(mu_grid, sols)]
    out = _out_dir(args.out)
    _write_csv(out / "q_path.csv", [json.dumps(resolved)], columns, rows)
    (out / "q_path.json").write_text(json.dumps({
        "config": resolved,
        "solutions": [s.to_json_dict() for s in sols],
        "mu_grid": mu_grid,
    }))
    print(f"path: {len(sols)} solutions -> {out / 'q_path.csv'}")
    return 0


def cmd_sweep(args) -> int:
    with open(args.spec, "rb") as fh:
        spec_cfg = tomllib.load(fh)
    body = spec_cfg.get("sweep", spec_cfg)
    dataset = resolve_dataset(body["data"])
    rules = [regimes.StoppingRule(r["kind"], float(r["value"]))
             for r in body["rules"]]
    spec = regimes.SweepSpec(
        dataset=dataset,
        depths=[int(v) for v in body["depths"]],
        alphas=[float(v) for v in body["alphas"]],
        rules=rules,
        eta=body.get("eta"),
        mode=body.get("mode", "normalized_gd"),
        max_steps=int(body.get("max_steps", 5_000_000)),
        record_every=int(body.get("record_every", 1000)),
        metrics=tuple(body.get("metrics", ())),
        workers=int(args.workers or body.get("workers", 1)),
    )
    result = regimes.run_sweep(spec)
    resolved = {"command": "sweep", "spec_file": str(args.spec), **{
        k: v for k, v in body.items() if k != "rules"
    }, "rules": [{"kind": r.kind, "value": r.value} for r in rules]}
    out = _out_dir(args.out)
    scalar_cols = sorted({
        k for row in result.rows for k, v in row.items()
        if not isinstance(v, (list, dict))
    })
    rows = [[row.get(c) for c in scalar_cols] for row in result.rows]
    _write_csv(out / "sweep.csv", [json.dumps(resolved)], scalar_cols, rows)
    (out / "sweep.json").write_text(
        json.dumps({"config": resolved, "rows": result.rows}))
    n_err = sum(1 for row in result.rows if row.get("error"))
    print(f"sweep: {len(result.rows)} cells ({n_err} errors) "
          f"-> {out / 'sweep.csv'}")
    return 0


def cmd_check_condition(args) -> int:
    dataset = resolve_dataset(args.data)
    payload = json.loads(Path(args.trajectory).read_text())
    records = [
        dynamics.TrajectoryRecord(
            step=r["step"], log_flow_time=r["log_flow_time"],
            gamma=r["gamma"], gamma_tilde=r["gamma_tilde"],
            w=np.array(r["w"]), s_accum=np.array(r["s_accum"]),
            metrics=r.get("metrics", {}),
        )
        for r in payload["records"]
    ]
    if args.w_hat == "l1":
        w_hat = margins.l1_max_margin(dataset).w
    elif args.w_hat == "l2":
        w_hat = margins.l2_max_margin(dataset).w
    else:
        w_hat = regimes.margin_rescale(records[-1].w, dataset)
    lo, hi = (float(v) for v in args.window.split(","))
    report = regimes.condition1_check(records, dataset, w_hat,
                                      float(args.rho0), lo, hi)
    out = _out_dir(args.out)
    path = out / "condition_report.json"
    path.write_text(json.dumps({
        "config": {"command": "check-condition", "data": args.data,
                   "trajectory": str(args.trajectory), "rho0": args.rho0,
                   "window": [lo, hi], "w_hat": args.w_hat},
        "rho0": report.rho0,
        "gamma_tilde_star": report.gamma_tilde_star,
        "window": list(report.window),
        "per_nonsupport_sample": report.per_nonsupport_sample,
        "holds": report.holds,
    }))
    print(f"check-condition: holds = {report.holds} -> {path}")
    return 0


def cmd_kernel_distance(args) -> int:
    args.metrics = "kernel_distance"
    return cmd_simulate(args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diagnet",
        description="diagonal-network training dynamics and max-margin "
                    "solvers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", default=None, help="output directory")

    sim = sub.add_parser("simulate", help="run one training trajectory")
    sim.add_argument("--config", default=None, help="TOML config file")
    sim.add_argument("--data", default=None)
    sim.add_argument("--depth", type=int, default=None)
    sim.add_argument("--alpha", type=float, default=None)
    sim.add_argument("--eta", type=float, default=None)
    sim.add_argument("--mode", choices=["plain_gd", "normalized_gd"],
                     default=None)
    sim.add_argument("--gamma-tilde", dest="gamma_tilde", type=float,
                     default=None, help="fixed gamma_tilde target")
    sim.add_argument("--mu", type=float, default=None,
                     help="mu-scaled target alpha^D/mu")
    sim.add_argument("--max-steps", dest="max_steps", type=int, default=None)
    sim.add_argument("--record-every", dest="record_every", type=int,
                     default=None)
    sim.add_argument("--metrics", default=None,
                     help="comma list: kernel_distance,closed_form_residual")
    sim.add_argument("--seed", type=int, default=None)
    add_common(sim)
    sim.set_defaults(func=cmd_simulate)

    sol = sub.add_parser("solve", help="solve one max-margin problem")
    sol.add_argument("--data", required=True)
    sol.add_argument("--objective", required=True,
                     choices=["l2", "l1", "qmu", "lqd"])
    sol.add_argument("--mu", type=float, default=None)
    sol.add_argument("--depth", type=int, default=None)
    sol.add_argument("--w0", default=None, help="JSON list start point")
    add_common(sol)
    sol.set_defaults(func=cmd_solve)

    pth = sub.add_parser("path", help="penalty max-margin path over mu")
    pth.add_argument("--data", required=True)
    pth.add_argument("--depth", type=int, default=None)
    pth.add_argument("--mu-grid", dest="mu_grid", required=True,
                     help="descending comma list, or log:hi,lo,count")
    add_common(pth)
    pth.set_defaults(func=cmd_path)

    swp = sub.add_parser("sweep", help="grid of trajectories from a TOML "
                                       "spec")
    swp.add_argument("--spec", required=True)
    swp.add_argument("--workers", type=int, default=None)
    add_common(swp)
    swp.set_defaults(func=cmd_sweep)

    chk = sub.add_parser("check-condition",
                         help="support-stability condition over a window")
    chk.add_argument("--trajectory", required=True,
                     help="trajectory.json from simulate")
    chk.add_argument("--data", required=True)
    chk.add_argument("--rho0", type=float, default=1.01)
    chk.add_argument("--window", required=True, help="lo,hi in gamma_tilde")
    chk.add_argument("--w-hat", dest="w_hat", default="final",
                     choices=["final", "l1", "l2"])
    add_common(chk)
    chk.set_defaults(func=cmd_check_condition)

    kd = sub.add_parser("kernel-distance",
                        help="simulate with the kernel-distance metric")
    kd.add_argument("--config", default=None)
    kd.add_argument("--data", default=None)
    kd.add_argument("--depth", type=int, default=None)
    kd.add_argument("--alpha", type=float, default=None)
    kd.add_argument("--eta", type=float, default=None)
    kd.add_argument("--mode", choices=["plain_gd", "normalized_gd"],
                    default=None)
    kd.add_argument("--gamma-tilde", dest="gamma_tilde", type=float,
                    default=None)
    kd.add_argument("--mu", type=float, default=None)
    kd.add_argument("--max-steps", dest="max_steps", type=int, default=None)
    kd.add_argument("--record-every", dest="record_every", type=int,
                    default=None)
    kd.add_argument("--seed", type=int, default=None)
    add_common(kd)
    kd.set_defaults(func=cmd_kernel_distance)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (data_mod.DataError, data_mod.NonSeparableError,
            margins.SolverError, dynamics.BudgetExhaustedError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
