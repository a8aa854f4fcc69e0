#!/usr/bin/env python3
"""Cost-curve shape under different loss/delay weights alpha (the fig7
preset); the per-round cost column is what the stopping rule watches.

Usage: python3 scripts/run_alpha_sweep.py [--out DIR] [--trials N]
"""
import sys

from fogfl.cli import main

if __name__ == "__main__":
    sys.exit(main(["preset", "fig7", *sys.argv[1:]]))
