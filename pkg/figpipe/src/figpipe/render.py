"""CSV loading, trial aggregation, and matplotlib rendering."""
from __future__ import annotations

import csv
import glob as globlib
from dataclasses import dataclass
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .spec import FigureSpec, Series, SpecError  # noqa: E402


@dataclass(frozen=True)
class SeriesData:
    label: str
    x: np.ndarray
    mean: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    trials: int


def _read_columns(path: str, x: str, y: str, kind: str):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (x, y):
            if col not in header:
                raise SpecError(f"{path}: missing column {col!r} "
                                f"(has: {', '.join(header)})")
        xs, ys = [], []
        for row in reader:
            if kind and row.get("kind", "") != kind:
                continue
            if row[x] == "" or row[y] == "":
                continue
            xs.append(float(row[x]))
            ys.append(float(row[y]))
    if not xs:
        raise SpecError(f"{path}: no usable rows for columns "
                        f"{x!r}/{y!r} (kind={kind!r})")
    return np.asarray(xs), np.asarray(ys)


def load_series(series: Series, spec: FigureSpec) -> SeriesData:
    """Read every trial matching the series glob and aggregate them.

    Trials are aligned on their common leading rounds; the band is the
    pointwise min/max across trials.
    """
    pattern = str(spec.base_dir / series.glob)
    files = sorted(globlib.glob(pattern))
    if not files:
        raise SpecError(f"series {series.label!r}: no CSV matches {pattern}")
    per_trial = [_read_columns(f, spec.x, spec.y, spec.kind) for f in files]
    n = min(x.size for x, _ in per_trial)
    x0 = per_trial[0][0][:n]
    ys = np.vstack([y[:n] for _, y in per_trial])
    return SeriesData(label=series.label, x=x0, mean=ys.mean(axis=0),
                      lo=ys.min(axis=0), hi=ys.max(axis=0), trials=len(files))


def render(spec: FigureSpec, out_dir=None) -> Path:
    """Render one figure; returns the written path.

    The data is loaded (and validated) in full before any file is touched,
    so a failing spec never leaves a partial image behind.
    """
    loaded = [load_series(s, spec) for s in spec.series]
    out_dir = spec.base_dir if out_dir is None else Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / spec.output

    fig, ax = plt.subplots(figsize=(5.0, 3.4), constrained_layout=True)
    for data in loaded:
        line, = ax.plot(data.x, data.mean, label=data.label, linewidth=1.6)
        if data.trials > 1:
            ax.fill_between(data.x, data.lo, data.hi,
                            color=line.get_color(), alpha=0.18, linewidth=0)
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.y_label)
    if spec.title:
        ax.set_title(spec.title)
    if spec.logy:
        ax.set_yscale("log")
    ax.legend(frameon=False)
    ax.grid(True, alpha=0.3)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
