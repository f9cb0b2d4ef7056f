"""Bond-dimension convergence of <sz(t)> at one spin-boson point.

    python scripts/spinboson_convergence.py [--out out/spinboson_m_sweep]
"""

import argparse
import json
from pathlib import Path

from tnsim.cli import main as cli

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/spinboson_m_sweep")
    args = ap.parse_args()
    out = Path(args.out)
    cli(["sweep", "--config", str(CONFIGS / "spinboson_m_sweep.json"), "--out", str(out)])
    cli(["converge", "--data", str(out / "aggregate.csv"), "--axis", "tdvp.max_bond", "--tol", "1e-2",
         "--out", str(out / "verdict.json")])
    verdict = json.loads((out / "verdict.json").read_text())
    print(f"converged at M={verdict['converged_at']}")


if __name__ == "__main__":
    main()
