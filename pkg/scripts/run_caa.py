#!/usr/bin/env python3
"""Command-line entrypoint for the constrained Anderson acceleration experiments.

Usage:
    python3 -m scripts.run_caa rates --rho 0.9,0.999 --k 3,5,8
    python3 -m scripts.run_caa chebsolve --rho 0.9 --k 5 --out out/curve.csv --plot
    python3 -m scripts.run_caa run --config experiments/guarded_runs.conf --out out/guarded_runs.csv
"""

from src.cli import main

if __name__ == "__main__":  # pragma: no cover - script entrypoint here
    raise SystemExit(main())
