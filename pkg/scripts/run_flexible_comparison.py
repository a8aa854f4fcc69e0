#!/usr/bin/env python3
"""Flexible (straggler-aware) aggregation against full aggregation and the
random-sampling baseline (the fig11-12 preset).

Usage: python3 scripts/run_flexible_comparison.py [--out DIR] [--trials N]
"""
import sys

from fogfl.cli import main

if __name__ == "__main__":
    sys.exit(main(["preset", "fig11-12", *sys.argv[1:]]))
