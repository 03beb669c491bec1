"""Compare -Delta_T F / T^2 with the closed-form low-temperature coefficients.

Usage: python scripts/low_temperature.py
"""

import numpy as np

from casimir1d import asymptotics as asy
from casimir1d import thermo
from casimir1d.params import Geometry, OscillatorParams, ThermalParams
from casimir1d.phases import PhaseFunction

SYSTEMS = [
    ("single", PhaseFunction("single", OscillatorParams(1.0, 0.3)), asy.lowT_single(OscillatorParams(1.0, 0.3))),
    ("single, Omega=0", PhaseFunction("single", OscillatorParams(0.0, 0.3)), asy.lowT_single(OscillatorParams(0.0, 0.3))),
    ("box", PhaseFunction("box", OscillatorParams(1.0, 0.3, 0.5), Geometry(1.0, 2.0)),
     asy.lowT_box(OscillatorParams(1.0, 0.3, 0.5), Geometry(1.0, 2.0))),
    ("line", PhaseFunction("line", OscillatorParams(1.0, 0.1, 1.0), Geometry(1.0)),
     asy.lowT_line(OscillatorParams(1.0, 0.1, 1.0), Geometry(1.0))),
    ("line, Omega=0", PhaseFunction("line", OscillatorParams(0.0, 0.1, 1.0), Geometry(0.5)),
     asy.lowT_line(OscillatorParams(0.0, 0.1, 1.0), Geometry(0.5))),
]


def main():
    temps = np.geomspace(1e-3, 1e-1, 5)
    for name, phase, coeff in SYSTEMS:
        print(f"{name}: c_F = {coeff.c_F:.8f}")
        for T in temps:
            rF, _, _ = thermo.thermal_parts(phase, ThermalParams(T), check=False)
            ratio = -rF.value / T**2 / coeff.c_F
            print(f"  T = {T:8.1e}   -dTF/(c_F T^2) = {ratio:.6f}")


if __name__ == "__main__":
    main()
