"""Tabulate real-frequency against Matsubara free energies for the line and the box.

Usage: python scripts/compare_representations.py [--bound-term general]
"""

import argparse
import itertools

from casimir1d import matsubara as ms
from casimir1d import thermo
from casimir1d.params import Geometry, OscillatorParams, ThermalParams
from casimir1d.phases import PhaseFunction


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bound-term", default="general", choices=ms.BOUND_TERM_FORMS)
    args = ap.parse_args()

    print(f"{'gamma':>6} {'T':>5} {'Omega':>5} {'b':>4} {'F_realfreq':>16} {'F_matsubara':>16} {'rel diff':>9}")
    for gam, T, om, b in itertools.product((0.0, 0.1, 1.0), (0.1, 1.0), (0.0, 1.0), (0.5, 2.0)):
        if b == 2 * om * om:
            continue  # degenerate point b = 2 Omega^2 / g
        p, geom, th = OscillatorParams(om, gam, 1.0), Geometry(b), ThermalParams(T)
        rf = thermo.free_energy_real_freq(PhaseFunction("line", p, geom), th).F
        mt = ms.free_energy_matsubara_line(p, geom, th, bound_term=args.bound_term).F
        print(f"{gam:6.2f} {T:5.2f} {om:5.2f} {b:4.1f} {rf:16.10f} {mt:16.10f} {abs(rf - mt) / abs(rf):9.1e}")

    p, geom, th = OscillatorParams(1.0, 0.3, 0.5), Geometry(1.0, 2.0), ThermalParams(1.0)
    rf = thermo.free_energy_real_freq(PhaseFunction("box", p, geom, reference=True), th).F
    rep = ms.free_energy_matsubara_box(p, geom, th)
    print(f"\nbox L=2 (L_* = {rep.diagnostics['L_star']:g}): realfreq {rf:.10f}, matsubara {rep.F:.10f}, "
          f"rel diff {abs(rf - rep.F) / abs(rf):.1e}")


if __name__ == "__main__":
    main()
