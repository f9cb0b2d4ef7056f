"""Retinal model populations: reduced model against the exact propagator, then the full chain.

    python scripts/retinal_populations.py [--out out/retinal] [--skip-full]

The full run uses ``configs/retinal_full.json``, whose parameter values are
placeholders; the curves are a smoke test, not a reproduction of measured data.
"""

import argparse
from pathlib import Path

import numpy as np

from tnsim.config import load_run_config
from tnsim.models import (RetinalParams, retinal_initial_state, retinal_observables, retinal_reduced_bath,
                          retinal_terms)
from tnsim.mpo import mpo_from_terms
from tnsim.oracle import exact_propagate
from tnsim.plotting import plot_file
from tnsim.runner import run, write_rows
from tnsim.tdvp import TdvpConfig, tdvp_evolve

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def reduced(out: Path):
    p = RetinalParams(inertia=4000.0, W0=3.6, W1=1.19, E1=2.48, omega_c=0.19, kappa_c=0.1, lam=0.19,
                      bath=retinal_reduced_bath(4), n_theta=11, d_modes=6, full_model=False)
    terms, bases = retinal_terms(p)
    psi0 = retinal_initial_state(p, max_bond=4)
    cfg = TdvpConfig(dt=2.0, n_steps=250, max_bond=32, switch_step=5, pre_expand=4)
    obs = retinal_observables()
    tr = tdvp_evolve(mpo_from_terms(terms, bases), psi0, cfg, obs)
    ref = exact_propagate(terms, bases, psi0.to_dense(), cfg.dt, cfg.n_steps, obs)
    err = max(float(np.max(np.abs(tr.series(k) - ref.series(k)))) for k in obs)
    print(f"reduced model: max population deviation from the exact propagator {err:.2e}")
    rows = [[t, a, b, c] for t, a, b, c in zip(tr.times, tr.series("p_s1"), ref.series("p_s1"),
                                               np.abs(tr.series("p_s1") - ref.series("p_s1")))]
    write_rows(out / "reduced.csv", ["time", "p_s1_tdvp", "p_s1_exact", "abs_diff"], rows)
    plot_file(out / "reduced.csv", "line", out / "reduced.svg", x="time", y=["p_s1_tdvp", "p_s1_exact"])


def full(out: Path):
    base = load_run_config(CONFIGS / "retinal_full.json")
    for bond in (70, 128):
        res = run(base.with_overrides({"tdvp.max_bond": bond}), out / f"full_M{bond}")
        print(f"full model M={bond}: {res.status} {res.summary}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/retinal")
    ap.add_argument("--skip-full", action="store_true")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reduced(out)
    if not args.skip_full:
        full(out)


if __name__ == "__main__":
    main()
