"""Regenerate the figure-script fixtures from the simulator CLI.

Run from this directory:  python3 make_fixtures.py

Everything under data/ is produced by the `diagnet` command line (plus one
small JSON assembled from the library's accuracy-vs-initialization fit), so
the figure scripts are exercised against real pipeline outputs.
"""

import json
import math
import shutil
import subprocess
import sys
from pathlib import Path

HERE = Path(__file__).parent
DATA = HERE / "data"


def cli(*args):
    cmd = [sys.executable, "-m", "diagnet.cli", *args]
    subprocess.run(cmd, check=True, stdout=subprocess.PIPE)


def keep(tmp_name: str, final_name: str):
    shutil.move(DATA / "tmp" / tmp_name, DATA / final_name)


def main():
    DATA.mkdir(exist_ok=True)
    tmp = DATA / "tmp"

    # sphere-trajectory inputs: three initialization scales on the dataset
    # with a unique l1 optimum, plus the penalty path and reference optima
    for alpha, target, eta in (("0.1", 50, 1e-3), ("1", 1000, 1e-3),
                               ("100", 2000, 1e-5)):
        cli("simulate", "--data", "bundled:unique_l1", "--depth", "2",
            "--alpha", alpha, "--eta", f"{eta:g}",
            "--gamma-tilde", str(target),
            "--record-every", "5", "--out", str(tmp))
        keep("trajectory.csv", f"traj_alpha_{alpha}.csv")
    cli("path", "--data", "bundled:unique_l1", "--depth", "2",
        "--mu-grid", "0.5,0.1,0.01,0.001", "--out", str(tmp))
    keep("q_path.csv", "q_path_marks.csv")
    for objective in ("l1", "l2"):
        cli("solve", "--data", "bundled:unique_l1", "--objective", objective,
            "--out", str(tmp))
        keep(f"solution_{objective}.json", f"solution_{objective}.json")

    # a one-row trajectory: a short run truncated to its final record
    cli("simulate", "--data", "bundled:unique_l1", "--depth", "2",
        "--alpha", "1", "--eta", "1e-3", "--gamma-tilde", "2",
        "--record-every", "1000000000", "--out", str(tmp))
    lines = (tmp / "trajectory.csv").read_text().splitlines()
    head = [ln for ln in lines if ln.startswith("#") or ln.startswith("step")]
    (DATA / "traj_one_row.csv").write_text(
        "\n".join(head + [lines[-1]]) + "\n")
    (tmp / "trajectory.csv").unlink()

    # excess-norm curves per (alpha^D, depth)
    for a_pow in (0.1, 1.0):
        for depth in (2, 3, 10):
            alpha = a_pow ** (1.0 / depth)
            cli("simulate", "--data", "bundled:unique_l1",
                "--depth", str(depth), "--alpha", f"{alpha:.12g}",
                "--gamma-tilde", str(1500 * a_pow),
                "--record-every", "5",
                "--metrics", "excess_l1,excess_l2", "--out", str(tmp))
            keep("trajectory.csv", f"excess_a{a_pow:g}_D{depth}.csv")

    # kernel-distance curves per depth at alpha^D = 1
    for depth in (2, 3, 10):
        cli("kernel-distance", "--data", "bundled:unique_l1",
            "--depth", str(depth), "--alpha", "1", "--gamma-tilde", "100",
            "--record-every", "1", "--out", str(tmp))
        keep("trajectory.csv", f"kd_D{depth}.csv")

    # excess-plane trajectories on the dataset with a face of l1 optima
    for alpha, target in (("0.1", 50), ("30", 1500)):
        cli("simulate", "--data", "bundled:degenerate_l1", "--depth", "2",
            "--alpha", alpha, "--gamma-tilde", str(target),
            "--record-every", "5", "--metrics", "excess_l1,excess_l2",
            "--out", str(tmp))
        keep("trajectory.csv", f"plane_alpha_{alpha}.csv")

    # accuracy-vs-initialization points and fits (library computation)
    from diagnet import (
        StepperConfig, accuracy_vs_init_fit, compute_stats, init_params,
        l1_max_margin, run, sparse_random_dataset, suggest_eta,
        threshold_gamma_tilde,
    )
    ds = sparse_random_dataset(4, 10, seed=0)
    stats = compute_stats(ds)
    w_l1 = l1_max_margin(ds).w
    series = []
    for depth in (2, 3, 10):
        pts = []
        for a_pow in (0.1, 0.3, 1.0, 3.0):
            alpha = a_pow ** (1.0 / depth)
            cfg = StepperConfig(eta=suggest_eta(ds, depth, alpha),
                                gamma_tilde_target=8000.0 * a_pow,
                                record_every=1, max_steps=10_000_000)
            records = run(init_params(10, depth, alpha), ds, cfg,
                          stats=stats)
            pts.append((alpha, depth,
                        threshold_gamma_tilde(records, ds, w_l1, 0.05)))
        slope, intercept, _ = accuracy_vs_init_fit(pts)
        series.append({
            "label": f"depth {depth}",
            "points": [[depth * math.log(a), math.log(g)]
                       for a, _, g in pts],
            "fit": {"slope": slope, "intercept": intercept},
        })
    (DATA / "acc_vs_init.json").write_text(json.dumps({"series": series}))

    shutil.rmtree(tmp, ignore_errors=True)
    print("fixtures written to", DATA)


if __name__ == "__main__":
    main()
