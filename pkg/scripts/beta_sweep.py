"""Inverse-temperature sweep beta_l = beta0 (1 + l) over the four modes.

Thin wrapper over the ``nhjunction`` command; extra flags are passed through.

    python scripts/beta_sweep.py --beta 0.0005 --sweep-count 20 --out runs/sweep --workers 8
"""

import sys

from nhjunction.cli import main

if __name__ == "__main__":
    argv = sys.argv[1:]
    if "--sweep-count" not in argv:
        argv += ["--beta", "0.0005", "--sweep-count", "20"]
    sys.exit(main(argv))
