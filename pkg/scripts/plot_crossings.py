#!/usr/bin/env python3
"""Plot the spacing/temperature ratio of both bath contacts over time.

Reproduces the crossing picture behind the engine protocol: the hot
contact's ratio oscillates about omega_h/T_h and is caught the first
time it reaches omega_c/T_c (dot d1); the cold contact mirrors it (d2).

Usage:
    python scripts/plot_crossings.py [--config scenarios/fig5.toml]
                                     [--t-max 4.0] [--out crossings.png]
"""

import argparse
from pathlib import Path

from qotto import (
    BathContact,
    build_scenario,
    default_integrator,
    find_crossing_time,
    parse_scenario,
    thermal_state,
)

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(ROOT / "scenarios" / "fig5.toml"))
    ap.add_argument("--t-max", type=float, default=4.0)
    ap.add_argument("--out", default="crossings.png")
    args = ap.parse_args()

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        raise SystemExit("plotting needs matplotlib: pip install matplotlib")

    scenario = build_scenario(parse_scenario(Path(args.config).read_text()))
    fig, ax = plt.subplots(figsize=(7, 4.2))

    for side, omega, bath, style in (
        ("hot", scenario.omega_h, scenario.hot, "C3-"),
        ("cold", scenario.omega_c, scenario.cold, "C0--"),
    ):
        cfg = default_integrator(omega, bath, t_max=args.t_max)
        contact = BathContact(
            initial=thermal_state(omega, bath.temperature), bath=bath, omega_A=omega, cfg=cfg
        )
        traj = contact.trajectory()
        x_eq = omega / bath.temperature
        target = scenario.x_cold if side == "hot" else scenario.x_hot
        ax.plot(traj.times, traj.x_ratio, style, lw=1.4, label=f"{side} contact")
        ax.axhline(x_eq, color=style[:2], lw=0.6, alpha=0.5)
        crossing = find_crossing_time(contact, target, scenario.crossing)
        dot = "$d_1$" if side == "hot" else "$d_2$"
        ax.plot([crossing.time], [target], "ko", ms=5)
        ax.annotate(dot, (crossing.time, target), textcoords="offset points", xytext=(6, -12))
        print(f"{side}: equilibrium ratio {x_eq:.6g}, target {target:.6g}, "
              f"first crossing at t = {crossing.time:.6f}")

    ax.set_xlabel("time")
    ax.set_ylabel(r"$\omega / T_{\mathrm{eff}}$")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(args.out, dpi=160)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
