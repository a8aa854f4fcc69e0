#!/usr/bin/env python3
"""Completion-time comparison of the optimized allocator against the
equal-bandwidth and fixed-allocation baselines (the fig8 preset).

Usage: python3 scripts/run_scheme_comparison.py [--out DIR] [--trials N]
"""
import sys

from fogfl.cli import main

if __name__ == "__main__":
    sys.exit(main(["preset", "fig8", *sys.argv[1:]]))
