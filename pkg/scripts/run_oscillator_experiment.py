#!/usr/bin/env python3
"""Budget sweep on the damped-oscillator benchmark.

Writes results.csv, selection.json, and one surrogate archive per
(mode, budget) cell under --out. The config used is saved alongside.
"""
import argparse
import json
import sys
from pathlib import Path

from bifidelity.cli import main as cli_main


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="results/oscillator")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budgets", type=int, nargs="+", default=[4, 6, 8, 10, 12])
    p.add_argument("--lam", type=float, default=0.1)
    p.add_argument("--parallel", action="store_true")
    p.add_argument(
        "--narrow-band",
        action="store_true",
        help="restrict omega to [1.0, 1.2] where the coarse integrator is accurate",
    )
    return p.parse_args()


def main():
    args = parse_args()
    bench = {"name": "oscillator"}
    if args.narrow_band:
        bench["grid"] = [["omega", 1.0, 1.2, 2], ["gamma", 0.05, 0.5, 57]]
    doc = {
        "data": {"benchmark": bench},
        "lambda": args.lam,
        "seed": args.seed,
        "budgets": args.budgets,
        "out_dir": args.out,
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg_path = out / "config.json"
    cfg_path.write_text(json.dumps(doc, indent=1) + "\n", encoding="ascii")
    argv = ["run", "--config", str(cfg_path)]
    if args.parallel:
        argv.append("--parallel")
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
