"""Coherent/incoherent map of the sub-Ohmic spin-boson model over (s, alpha).

    python scripts/spinboson_phase_diagram.py [--out out/spinboson_phase] [--max-parallel N]

Runs the production grid and a bond-dimension check at representative points,
then writes ``phase_table.csv``, ``alpha_c.csv`` and ``phase.svg``.
"""

import argparse
from pathlib import Path

from tnsim.analysis import TimeSeries, convergence_check
from tnsim.cli import classify_aggregate
from tnsim.config import load_sweep_config
from tnsim.plotting import plot_file, read_table
from tnsim.runner import sweep
from tnsim.trajectory import read_trajectory_csv

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def bond_check(agg: Path, tol: float = 1e-2):
    header, body = read_table(agg)
    col = {name: header.index(name) for name in ("spinboson.s", "spinboson.alpha", "tdvp.max_bond", "result")}
    groups = {}
    for r in body:
        data = read_trajectory_csv(agg.parent / r[col["result"]])
        key = (float(r[col["spinboson.s"]]), float(r[col["spinboson.alpha"]]))
        groups.setdefault(key, []).append((int(r[col["tdvp.max_bond"]]), TimeSeries(data["time"], data["sz"])))
    return {key: convergence_check(sorted(runs, key=lambda x: x[0]), tol) for key, runs in sorted(groups.items())}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/spinboson_phase")
    ap.add_argument("--max-parallel", type=int)
    args = ap.parse_args()
    out = Path(args.out)

    grid = load_sweep_config(CONFIGS / "spinboson_phase_grid.json")
    _, agg = sweep(grid, out / "grid", args.max_parallel)
    table, brackets = classify_aggregate(agg, out)
    plot_file(table, "heatmap", out / "phase.svg", x="alpha", y="s", z="label")

    check = load_sweep_config(CONFIGS / "spinboson_phase_convergence.json")
    _, cagg = sweep(check, out / "bond_check", args.max_parallel)
    for (s, alpha), v in bond_check(cagg).items():
        print(f"s={s} alpha={alpha}: deviations {['%.1e' % d for d in v.deviations]} -> converged_at {v.converged_at}")
    print(Path(brackets).read_text())


if __name__ == "__main__":
    main()
