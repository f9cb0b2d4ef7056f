"""Command-line entry point: ``tnsim run|sweep|oracle|classify|converge|plot``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (UNCLASSIFIED, AnalysisError, PhaseLabel, TimeSeries, classify_dynamics,
                       convergence_check, phase_diagram)
from .config import ConfigError, load_json, load_sweep_config, parse_run_config
from .plotting import PlotError, plot_file, read_table
from .runner import (GROUND_STATE_CSV, TRAJECTORY_CSV, dynamics_problem, now, run, sweep, write_manifest,
                     write_rows)

log = logging.getLogger("tnsim")


def _load_run(args):
    data = load_json(args.config)
    if args.seed is not None:
        data["seed"] = args.seed
    return parse_run_config(data)


def cmd_run(args) -> int:
    cfg = _load_run(args)
    res = run(cfg, Path(args.out) if args.out else None)
    if res.status != "ok":
        print(f"run failed: {res.reason}", file=sys.stderr)
        return 1
    print(json.dumps(res.summary, sort_keys=True))
    return 0


def cmd_sweep(args) -> int:
    scfg = load_sweep_config(args.config)
    if args.seed is not None:
        scfg.base = scfg.base.with_overrides({"seed": args.seed})
    results, agg = sweep(scfg, Path(args.out) if args.out else None, args.max_parallel)
    failed = [k for k, r in enumerate(results) if r.status != "ok"]
    for k in failed:
        print(f"job_{k:04d} failed: {results[k].reason}", file=sys.stderr)
    print(f"{len(results) - len(failed)}/{len(results)} jobs ok; aggregate {agg}")
    return 1 if failed else 0


def cmd_oracle(args) -> int:
    """Exact-diagonalization counterpart of ``run`` for small systems."""
    from .oracle import ed_ground, exact_propagate, local_operator_action

    cfg = _load_run(args)
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
    started = now()
    if cfg.solver == "dmrg":
        from .models import ising2d_terms

        p = cfg.ising()
        rows = []
        for h in sorted(cfg.h_values()):
            terms, bases, _ = ising2d_terms(type(p)(**{**p.__dict__, "h": h}))
            e, v = ed_ground(terms, bases, seed=cfg.seed)
            mz = sum(np.vdot(v, local_operator_action(bases, i, "sz", v)).real for i in range(len(bases)))
            rows.append([h, abs(mz) / len(bases), e, 0.0])
        write_rows(out / GROUND_STATE_CSV, ["h", "abs_mz", "energy", "discarded_weight"], rows)
        files = [GROUND_STATE_CSV]
    else:
        tcfg = cfg.tdvp()
        prob = dynamics_problem(cfg)
        traj = exact_propagate(prob.terms, prob.bases, prob.psi0.to_dense(), tcfg.dt, tcfg.n_steps,
                               prob.observables)
        traj.write_csv(out / TRAJECTORY_CSV)
        files = [TRAJECTORY_CSV]
    write_manifest(out / "manifest.json", cfg.hash(), started,
                   [{"id": "oracle", "status": "ok", "seed": cfg.seed, "files": ["config.json", *files]}])
    print(f"wrote {out / files[0]}")
    return 0


def _axis_column(header, suffix, explicit):
    if explicit:
        if explicit not in header:
            raise AnalysisError(f"aggregate has no column {explicit!r}")
        return explicit
    hits = [c for c in header if c == suffix or c.endswith("." + suffix)]
    if len(hits) != 1:
        raise AnalysisError(f"cannot find a unique '{suffix}' axis column in {header}; pass it explicitly")
    return hits[0]


def _load_series(path: Path, observable: str) -> TimeSeries:
    from .trajectory import read_trajectory_csv

    data = read_trajectory_csv(path)
    if observable not in data:
        raise AnalysisError(f"{path}: no column {observable!r}")
    return TimeSeries(data["time"], data[observable])


def classify_aggregate(agg: Path, out: Path, observable: str = "sz", prominence: float = 0.01,
                       alpha_col: str | None = None, s_col: str | None = None) -> tuple[Path, Path]:
    header, body = read_table(agg)
    a_col = _axis_column(header, "alpha", alpha_col)
    s_col = _axis_column(header, "s", s_col)
    ia, is_, ir = header.index(a_col), header.index(s_col), header.index("result")
    rows, grid = [], []
    for r in body:
        alpha, s = float(r[ia]), float(r[is_])
        path = agg.parent / r[ir] if r[ir] else None
        try:
            if path is None or not path.exists():
                raise FileNotFoundError
            lab = classify_dynamics(_load_series(path, observable), prominence)
        except (FileNotFoundError, ValueError):
            lab = PhaseLabel(UNCLASSIFIED, reason="missing")
        grid.append((alpha, s, lab))
        ev = ";".join(f"{k}@{t:.6g}" for k, t, _ in lab.evidence)
        rows.append([alpha, s, lab.value, lab.reason, ev])
    out.mkdir(parents=True, exist_ok=True)
    table = out / "phase_table.csv"
    write_rows(table, ["alpha", "s", "label", "reason", "evidence"], rows)
    brackets = phase_diagram(grid)
    bfile = out / "alpha_c.csv"
    write_rows(bfile, ["s", "alpha_c_lower", "alpha_c_upper", "alpha_c_midpoint", "excluded"], [
        [b.s, "unbounded" if b.lower is None else b.lower, "unbounded" if b.upper is None else b.upper,
         "" if b.midpoint is None else b.midpoint, ";".join(f"{a:g}" for a in b.excluded)]
        for b in brackets])
    return table, bfile


def cmd_classify(args) -> int:
    agg = Path(args.data)
    out = Path(args.out) if args.out else agg.parent
    table, bfile = classify_aggregate(agg, out, args.observable, args.prominence, args.alpha_column, args.s_column)
    print(f"wrote {table} and {bfile}")
    return 0


def cmd_converge(args) -> int:
    agg = Path(args.data)
    header, body = read_table(agg)
    col = _axis_column(header, args.axis.split(".")[-1], args.axis if args.axis in header else None)
    j, ir = header.index(col), header.index("result")
    runs = []
    for r in sorted(body, key=lambda r: float(r[j])):
        if not r[ir]:
            raise AnalysisError(f"job at {col}={r[j]} has no result")
        runs.append((float(r[j]), _load_series(agg.parent / r[ir], args.observable)))
    verdict = convergence_check(runs, args.tol, parameter=col)
    doc = {"parameter": verdict.parameter, "values": list(verdict.values), "deviations": list(verdict.deviations),
           "converged_at": verdict.converged_at, "tol": verdict.tol}
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")
    return 0


def cmd_plot(args) -> int:
    out = plot_file(args.data, args.kind, args.out, x=args.x, y=args.y, z=args.z, group=args.group)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tnsim", description=__doc__)
    ap.add_argument("--version", action="version", version=f"tnsim {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, max_parallel=False):
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", help="output directory (overrides output_dir)")
        p.add_argument("--seed", type=int, help="override the config seed")
        if max_parallel:
            p.add_argument("--max-parallel", type=int, help="worker processes (overrides the config)")

    common(sub.add_parser("run", help="run one configuration"))
    common(sub.add_parser("sweep", help="run a parameter grid"), max_parallel=True)
    common(sub.add_parser("oracle", help="exact-diagonalization reference for a small configuration"))

    p = sub.add_parser("classify", help="label sweep trajectories coherent/incoherent and bracket alpha_c")
    p.add_argument("--data", required=True, help="aggregate.csv of a spin-boson sweep")
    p.add_argument("--out", help="output directory (default: next to the aggregate)")
    p.add_argument("--observable", default="sz")
    p.add_argument("--prominence", type=float, default=0.01)
    p.add_argument("--alpha-column")
    p.add_argument("--s-column")

    p = sub.add_parser("converge", help="convergence verdict over one sweep axis")
    p.add_argument("--data", required=True, help="aggregate.csv of the sweep")
    p.add_argument("--axis", required=True, help="axis column, e.g. tdvp.max_bond")
    p.add_argument("--tol", type=float, required=True)
    p.add_argument("--observable", default="sz")
    p.add_argument("--out", help="write the verdict JSON here")

    p = sub.add_parser("plot", help="render a CSV as SVG")
    p.add_argument("--data", required=True)
    p.add_argument("--kind", choices=["line", "heatmap"], required=True)
    p.add_argument("--out", required=True, help="SVG path")
    p.add_argument("--x")
    p.add_argument("--y", action="append", help="y column (repeatable)")
    p.add_argument("--z")
    p.add_argument("--group", help="one series per value of this column")
    return ap


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "oracle": cmd_oracle, "classify": cmd_classify,
            "converge": cmd_converge, "plot": cmd_plot}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "plot" and args.y and len(args.y) == 1:
        args.y = args.y[0]
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, AnalysisError, PlotError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
