#!/usr/bin/env python3
"""Contact times and power against coupling strength.

The cost-corrected work depends only on the four endpoint states, so it
stays flat across the sweep; what the coupling buys is speed: stronger
coupling reaches the crossing ratios sooner, raising power W/(tau1+tau2).

Usage:
    python scripts/coupling_tradeoff.py [--config scenarios/fig5.toml]
                                        [--gammas 0.08,0.1,0.15,0.2]
"""

import argparse
from pathlib import Path

from qotto import build_scenario, parse_scenario, run_otto_cycle
from qotto.config import apply_assignments, parse_sweep

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(ROOT / "scenarios" / "fig5.toml"))
    ap.add_argument("--gammas", default="0.08,0.1,0.15,0.2")
    args = ap.parse_args()

    base = parse_scenario(Path(args.config).read_text())
    values = ", ".join(args.gammas.split(","))
    sweep = parse_sweep(
        '[[axes]]\nname = "gamma"\npath = ["hot_bath.gamma", "cold_bath.gamma"]\n'
        f"values = [{values}]\n",
        base,
    )

    print(f"{'gamma':>8} {'tau1':>10} {'tau2':>10} {'W':>12} {'w_tilde':>12} {'power':>10}")
    for assignments in sweep.grid():
        scenario = build_scenario(apply_assignments(base, assignments))
        rep = run_otto_cycle(scenario)
        gamma = assignments[0][1]
        power = rep.w / (rep.tau1 + rep.tau2)
        print(
            f"{gamma:>8.3f} {rep.tau1:>10.5f} {rep.tau2:>10.5f} "
            f"{rep.w:>12.8f} {rep.w_tilde:>12.8f} {power:>10.5f}"
        )


if __name__ == "__main__":
    main()
