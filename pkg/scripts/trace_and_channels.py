"""Trace, population channels and coherence for all four modes.

Writes ``<out>/<mode>/{trace,xi11,xi22,chi11,chi22,re_chi12}.csv``.

    python scripts/trace_and_channels.py --out runs/channels --samples 2500
"""

import argparse
import dataclasses
from pathlib import Path

from nhjunction import cli
from nhjunction.ensemble import run_ensemble
from nhjunction.model import ModelParams
from nhjunction.observables import observable_series

CHANNELS = ("trace", "xi11", "xi22", "chi11", "chi22", "re_chi12")


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--out", type=Path, default=Path("runs/channels"))
    ap.add_argument("--samples", type=int, default=2500)
    ap.add_argument("--beta", type=float, default=0.005)
    ap.add_argument("--initial-state", default="adiabatic_superposition")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    base = ModelParams(n_mcs=args.samples, beta=args.beta, initial_state=args.initial_state)
    for mode, (nhc, decay) in cli.MODES.items():
        params = dataclasses.replace(base, nhc_enabled=nhc, decay_enabled=decay)
        rec = run_ensemble(params, record_stride=10, workers=args.workers)
        out = args.out / mode
        out.mkdir(parents=True, exist_ok=True)
        for name in CHANNELS:
            cli.write_csv(observable_series(rec, name), out / f"{name}.csv")
        tr = observable_series(rec, "trace")
        print(f"{mode:11s} Tr(0)={tr.mean[0]:.4f} Tr(50)={tr.mean[-1]:.4f}")


if __name__ == "__main__":
    main()
