"""Follow the line vacuum energy E0 * b towards strong coupling.

Usage: python scripts/dirichlet_sweep.py [--b 1.0]
"""

import argparse
import math

import numpy as np

from casimir1d import thermo
from casimir1d.asymptotics import dirichlet_energy
from casimir1d.params import Geometry, OscillatorParams


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--b", type=float, default=1.0)
    ap.add_argument("--omega", type=float, default=1.0)
    args = ap.parse_args()
    geom = Geometry(args.b)
    limit = dirichlet_energy(args.b)
    print(f"Dirichlet interval energy -pi/(24 b) = {limit:.10f}  (b E = {-math.pi / 24:.10f})")
    for g in np.logspace(0, 8, 9):
        E0, err = thermo.vacuum_energy_imag_axis(OscillatorParams(args.omega, 0.0, g), geom)
        print(f"g = {g:8.0e}   E0 = {E0:.10f} +/- {err:.1e}   E0 / limit = {E0 / limit:.8f}")


if __name__ == "__main__":
    main()
