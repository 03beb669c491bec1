"""Free decay of an oscillator in a discretised bath, with its energy ledger.

Usage: python scripts/bath_demo.py [--gamma 0.2] [--csv traj.csv] [--ensemble 16]
"""

import argparse
import math

import numpy as np

from casimir1d import bathsim as bs
from casimir1d.params import OscillatorParams


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--omega", type=float, default=1.0)
    ap.add_argument("--gamma", type=float, default=0.2)
    ap.add_argument("--modes", type=int, default=2000)
    ap.add_argument("--t-end", type=float, default=60.0)
    ap.add_argument("--csv", default=None, help="write the trajectory here")
    ap.add_argument("--ensemble", type=int, default=0, help="members of an equilibrium run at T = 1")
    args = ap.parse_args()

    p = OscillatorParams(args.omega, args.gamma, 1.0)
    bath = bs.BathDiscretization.build(p, args.modes, max(args.t_end, 100.0))
    tr = bs.simulate(bath, p, bs.relaxed_state(bath), args.t_end, n_samples=int(100 * args.t_end) + 1)
    rate, freq = bs.fit_free_decay(tr, p)
    w1 = math.sqrt(max(p.omega**2 - 0.25 * p.gamma**2, 0.0))
    print(f"decay rate {rate:.5f} (gamma/2 = {p.gamma / 2:.5f}), frequency {freq:.5f} (omega_1 = {w1:.5f})")
    print(f"relative energy drift {tr.energy_drift():.2e}")

    led = bs.energy_flows(tr)
    for t in np.linspace(0, args.t_end, 7):
        i = int(np.searchsorted(tr.t, t))
        i = min(i, tr.t.size - 1)
        print(f"t = {tr.t[i]:6.1f}  H_osc = {tr.H_osc[i]:.5f}  H_bath + H_int = {tr.H_bath[i] + tr.H_int[i]:.5f}  "
              f"flow residual = {led.residual[i]:+.1e}")
    if args.csv:
        tr.to_csv(args.csv)
        print(f"trajectory written to {args.csv}")

    if args.ensemble:
        res = bs.equilibrium_ensemble(p, T=1.0, members=args.ensemble, seed=0)
        print(f"<H_osc> = {res.mean:.4f} +/- {res.stderr:.4f} over {args.ensemble} members (equipartition: 1)")


if __name__ == "__main__":
    main()
