"""Spec-driven figure pipeline for the fogfl experiment CSV schema."""

from .render import SeriesData, load_series, render
from .spec import FigureSpec, Series, SpecError

__all__ = ["FigureSpec", "Series", "SpecError", "SeriesData",
           "load_series", "render"]

__version__ = "0.1.0"
