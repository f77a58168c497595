"""Extended-energy drift of the integrator versus time step and thermostat substeps.

    python scripts/energy_drift.py --trajectories 100 --steps 10000
"""

import argparse
import dataclasses

import numpy as np

from nhjunction.dynamics import conserved_energy, step
from nhjunction.model import ModelParams
from nhjunction.sampling import draw_initial_ensemble


def max_drift(params, n_traj, n_step, pair=(1, 1)):
    x0, _ = draw_initial_ensemble(params, np.arange(n_traj))
    e0 = conserved_energy(x0, pair, params)
    x, drift = x0, np.zeros(n_traj)
    for _ in range(n_step):
        x = step(x, pair, params)
        np.maximum(drift, np.abs(conserved_energy(x, pair, params) - e0), out=drift)
    return np.max(drift / np.abs(e0))


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--trajectories", type=int, default=100)
    ap.add_argument("--steps", type=int, default=10_000)
    ap.add_argument("--beta", type=float, default=0.005)
    args = ap.parse_args()

    base = ModelParams(nhc_enabled=True, beta=args.beta)
    for tau in (0.01, 0.005, 0.0025):
        for ns in (1, 2, 4, 8):
            p = dataclasses.replace(base, tau=tau, thermostat_substeps=ns)
            n = int(round(args.steps * base.tau / tau))
            print(f"tau={tau:<7} substeps={ns}  max relative drift {max_drift(p, args.trajectories, n):.2e}")


if __name__ == "__main__":
    main()
