"""Execute run and sweep configurations and write their artifacts.

Every run directory holds the effective ``config.json``, a result CSV
(``ground_state.csv`` or ``trajectory.csv``) and ``manifest.json``. Sweeps
put each job in ``job_XXXX/`` and join the per-job summaries into
``aggregate.csv``, ordered lexicographically by axis values. The aggregate
carries no timestamps, so it is byte-identical across worker counts.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import multiprocessing
import os
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import abs_magnetization
from .config import RunConfig, SweepConfig
from .dmrg import dmrg_ground_state
from .models import (ising2d_terms, retinal_initial_state, retinal_observables, retinal_terms,
                     spin_boson_initial_state, spin_boson_terms)
from .mpo import mpo_from_terms
from .mps import MPS, expand_bond, mps_product, random_mps
from .sites import term
from .tdvp import tdvp_evolve
from .trajectory import Trajectory, _fmt

log = logging.getLogger(__name__)

THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")
GROUND_STATE_CSV = "ground_state.csv"
TRAJECTORY_CSV = "trajectory.csv"


@dataclass
class JobResult:
    status: str
    summary: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    reason: str = ""


@dataclass
class DynamicsProblem:
    terms: list
    bases: list
    psi0: MPS
    observables: dict


def dynamics_problem(cfg: RunConfig) -> DynamicsProblem:
    """Hamiltonian terms, initial state and observables of a TDVP run."""
    if cfg.model == "spinboson":
        p = cfg.spinboson()
        terms, bases = spin_boson_terms(p)
        return DynamicsProblem(terms, bases, spin_boson_initial_state(p), {"sz": (0, "sz")})
    if cfg.model == "retinal":
        p = cfg.retinal()
        terms, bases = retinal_terms(p)
        bond = int(cfg.model_params.get("initial_bond", 4))
        psi0 = retinal_initial_state(p, max_bond=bond, seed=cfg.seed)
        return DynamicsProblem(terms, bases, psi0, retinal_observables())
    p = cfg.ising()
    terms, bases, _ = ising2d_terms(p)
    psi0 = mps_product(bases, [[1.0, 0.0]] * len(bases))
    mz = [term(1.0 / len(bases), (i, "sz")) for i in range(len(bases))]
    return DynamicsProblem(terms, bases, psi0, {"mz": mz})


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([x if isinstance(x, str) else _fmt(x) for x in row])


def _run_dmrg(cfg: RunConfig, out: Path) -> JobResult:
    p = cfg.ising()
    sched = cfg.dmrg_schedule()
    # later field values warm-start from the previous ground state and skip the bond ramp
    warm = dataclasses.replace(sched, sweeps=sched.sweeps[-1:])
    rows, state, converged = [], None, True
    for h in sorted(cfg.h_values()):
        q = type(p)(**{**p.__dict__, "h": h})
        terms, bases, _ = ising2d_terms(q)
        mpo = mpo_from_terms(terms, bases)
        init = state if state is not None else random_mps(bases, cfg.init_bond(), cfg.seed, real=True)
        res = dmrg_ground_state(mpo, init, sched if state is None else warm, rng=cfg.seed)
        state = res.state
        converged &= res.converged
        rows.append([h, abs_magnetization(res.state), res.energy, res.max_discarded_weight])
    write_rows(out / GROUND_STATE_CSV, ["h", "abs_mz", "energy", "discarded_weight"], rows)
    last = rows[-1]
    summary = {"abs_mz": last[1], "energy": last[2], "discarded_weight": last[3],
               "converged": int(converged), "pin": p.pin_field}
    return JobResult("ok", summary, [GROUND_STATE_CSV])


def relative_drift(values) -> float:
    """``max |x - x0| / |x0|``; falls back to the absolute drift when ``x0`` vanishes."""
    v = np.asarray(values, dtype=float)
    scale = abs(v[0]) if abs(v[0]) > 1e-12 else 1.0
    return float(np.max(np.abs(v - v[0])) / scale)


def trajectory_summary(traj: Trajectory) -> dict:
    norms = np.asarray(traj.norms)
    en = np.asarray(traj.energies)
    out = {f"{k}_final": float(traj.series(k)[-1]) for k in traj.observables}
    out["norm_drift"] = float(np.max(np.abs(norms - norms[0])))
    out["energy_drift"] = relative_drift(en)
    out["max_bond"] = int(max(traj.bond_profile))
    return out


def _run_tdvp(cfg: RunConfig, out: Path) -> JobResult:
    tcfg = cfg.tdvp()
    prob = dynamics_problem(cfg)
    mpo = mpo_from_terms(prob.terms, prob.bases)
    psi0 = prob.psi0
    if tcfg.scheme == "one-site":
        psi0 = expand_bond(psi0, mpo, tcfg.max_bond, rng=cfg.seed)
    traj = tdvp_evolve(mpo, psi0, tcfg, prob.observables)
    traj.write_csv(out / TRAJECTORY_CSV)
    return JobResult("ok", trajectory_summary(traj), [TRAJECTORY_CSV])


def execute(cfg: RunConfig, out: Path) -> JobResult:
    """Run one configuration into ``out``; solver errors become a failed result."""
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
    try:
        res = _run_dmrg(cfg, out) if cfg.solver == "dmrg" else _run_tdvp(cfg, out)
    except Exception as err:  # noqa: BLE001 - any solver failure marks the job failed
        log.debug("job failed:\n%s", traceback.format_exc())
        return JobResult("failed", reason=f"{type(err).__name__}: {err}")
    res.files = ["config.json", *res.files]
    return res


def now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S%z")


def write_manifest(path: Path, config_hash: str, started: str, jobs: list[dict]) -> None:
    manifest = {
        "config_hash": config_hash,
        "engine_version": __version__,
        "started": started,
        "finished": now(),
        "jobs": jobs,
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def run(cfg: RunConfig, out: Path | None = None) -> JobResult:
    out = Path(out if out is not None else cfg.output_dir)
    started = now()
    res = execute(cfg, out)
    write_manifest(out / "manifest.json", cfg.hash(), started, [{
        "id": "run", "status": res.status if res.status == "ok" else f"failed({res.reason})",
        "seed": cfg.seed, "files": res.files,
    }])
    return res


def _job_worker(args):
    cfg_dict, out = args
    from .config import parse_run_config

    return execute(parse_run_config(cfg_dict), Path(out))


def _pool(workers: int) -> ProcessPoolExecutor:
    # spawned workers inherit the environment; one BLAS thread each keeps results reproducible
    for var in THREAD_VARS:
        os.environ[var] = "1"
    return ProcessPoolExecutor(max_workers=workers, mp_context=multiprocessing.get_context("spawn"))


def sweep(scfg: SweepConfig, out: Path | None = None, max_parallel: int | None = None) -> tuple[list[JobResult], Path]:
    """Run every grid point; returns per-job results (grid order) and the aggregate path."""
    out = Path(out if out is not None else scfg.base.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = now()
    grid = scfg.grid()
    cfgs = [scfg.base.with_overrides(ov) for ov in grid]
    dirs = [out / f"job_{k:04d}" for k in range(len(grid))]
    workers = max(1, min(max_parallel or scfg.max_parallel, len(grid)))
    with _pool(workers) as pool:
        results = list(pool.map(_job_worker, [(c.to_dict(), str(d)) for c, d in zip(cfgs, dirs)]))

    axes = list(scfg.axes)
    summary_keys: list[str] = []
    for r in results:
        for k in r.summary:
            if k not in summary_keys:
                summary_keys.append(k)
    result_file = TRAJECTORY_CSV if scfg.base.solver == "tdvp" else GROUND_STATE_CSV
    rows = []
    for ov, d, r in zip(grid, dirs, results):
        row = [json.dumps(ov[a]) if isinstance(ov[a], (list, dict)) else ov[a] for a in axes]
        row += [d.name, r.status, f"{d.name}/{result_file}" if r.status == "ok" else ""]
        row += [r.summary.get(k, "") for k in summary_keys]
        rows.append(row)
    agg = out / "aggregate.csv"
    write_rows(agg, [*axes, "job", "status", "result", *summary_keys], rows)
    jobs = [{"id": d.name, "overrides": ov, "seed": c.seed,
             "status": r.status if r.status == "ok" else f"failed({r.reason})",
             "files": [f"{d.name}/{f}" for f in r.files]}
            for ov, d, c, r in zip(grid, dirs, cfgs, results)]
    write_manifest(out / "manifest.json", scfg.hash(), started, jobs)
    return results, agg
