"""Reproducible experiment presets at desk scale.

Each preset expands to a list of (label, RunConfig) pairs sharing matched
seeds, so schemes and sweep points are directly comparable.  Trial counts
default to 10; raise with the CLI's --trials flag.
"""
from __future__ import annotations

from .config import RunConfig

# desk-scale common base: smaller task and fewer rounds than the full-scale
# setup, same physics
_BASE = dict(
    J=100, I=5, n_samples=3000, q=64, num_classes=10,
    G=60, G_bar=20, k_bar=5, e_max=0.1,
)


def _cfg(**over) -> RunConfig:
    kw = dict(_BASE)
    kw.update(over)
    return RunConfig(**kw)


def _batch_sweep():
    return [(f"B{b}", _cfg(scheme="full", B=b, L=10)) for b in (10, 20, 50)]


def _local_iter_sweep():
    return [(f"L{l}", _cfg(scheme="full", L=l, B=20)) for l in (5, 10, 20)]


def _alpha_sweep():
    return [(f"alpha{a}", _cfg(scheme="full", alpha=a, G=80, G_bar=80))
            for a in (0.1, 0.3, 0.5, 0.7)]


def _scheme_comparison():
    return [(s, _cfg(scheme=s, G=100, G_bar=100)) for s in ("full", "fra", "eb")]


def _emax_sweep():
    out = []
    for e in (0.05, 0.1, 0.2):
        for s in ("full", "fra", "eb"):
            out.append((f"emax{e}_{s}", _cfg(scheme=s, e_max=e, G=40, G_bar=40)))
    return out


def _gradient_counts():
    out = [(f"dT{d}", _cfg(scheme="flexible", delta_T=d, J_min=20, G=80, G_bar=80))
           for d in (0.05, 0.1, 0.2)]
    out.append(("full", _cfg(scheme="full", G=80, G_bar=80)))
    return out


def _flexible_vs_full():
    # a wide CPU spread gives the straggler tail that makes the flexible
    # schedule's early cheap rounds pay off
    common = dict(J=50, q=64, num_classes=10, n_samples=2500, G=100, G_bar=100,
                  J_min=15, delta_T=0.015, delta_G=8, subset_size=5,
                  partition_mode="one-class", f_max_range=(2e7, 4e8))
    return [(s, _cfg(scheme=s, **common)) for s in ("full", "flexible", "sampling")]


PRESETS = {
    "fig5": _batch_sweep,
    "fig6": _local_iter_sweep,
    "fig7": _alpha_sweep,
    "fig8": _scheme_comparison,
    "fig9": _emax_sweep,
    "fig10": _gradient_counts,
    "fig11-12": _flexible_vs_full,
}


def preset(name: str) -> list[tuple[str, RunConfig]]:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return PRESETS[name]()
