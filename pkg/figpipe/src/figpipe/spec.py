"""Figure specifications: a small YAML schema describing one plot.

A spec names an x and a y column from the simulator CSV schema, one or more
series (each a glob of per-trial CSVs plus a legend label), and the output
file.  Globs are resolved relative to the spec file, so a checked-in spec
plus its data directory is self-contained.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml


class SpecError(ValueError):
    """Raised for malformed or unsatisfiable figure specs."""


@dataclass(frozen=True)
class Series:
    label: str
    glob: str


@dataclass(frozen=True)
class FigureSpec:
    title: str
    x: str
    y: str
    x_label: str
    y_label: str
    output: str
    series: tuple[Series, ...]
    kind: str = "round"            # which CSV row kind to keep
    logy: bool = False
    base_dir: Path = field(default=Path("."), compare=False)

    def __post_init__(self):
        if not self.series:
            raise SpecError("figure spec needs at least one series")
        if not self.output:
            raise SpecError("figure spec needs an output file name")

    @classmethod
    def from_yaml(cls, path) -> "FigureSpec":
        path = Path(path)
        with open(path) as fh:
            raw = yaml.safe_load(fh) or {}
        if not isinstance(raw, dict):
            raise SpecError(f"{path}: spec must be a mapping")
        known = {"title", "x", "y", "x_label", "y_label", "output",
                 "series", "kind", "logy"}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise SpecError(f"{path}: unknown spec keys: {', '.join(unknown)}")
        missing = sorted(k for k in ("x", "y", "output", "series")
                         if k not in raw)
        if missing:
            raise SpecError(f"{path}: missing spec keys: {', '.join(missing)}")
        series = []
        for entry in raw["series"]:
            if not isinstance(entry, dict) or "label" not in entry \
                    or "glob" not in entry:
                raise SpecError(f"{path}: each series needs 'label' and 'glob'")
            series.append(Series(label=str(entry["label"]),
                                 glob=str(entry["glob"])))
        return cls(
            title=str(raw.get("title", "")),
            x=str(raw["x"]),
            y=str(raw["y"]),
            x_label=str(raw.get("x_label", raw["x"])),
            y_label=str(raw.get("y_label", raw["y"])),
            output=str(raw["output"]),
            series=tuple(series),
            kind=str(raw.get("kind", "round")),
            logy=bool(raw.get("logy", False)),
            base_dir=path.parent,
        )
