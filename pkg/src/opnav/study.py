"""Reference aggregates of the bundled operator training study.

Two cohorts of ten milling operators were tracked over 64 batches of
cushion-slide production; the published aggregates are the cumulative
average setup minutes at each production doubling. The raw per-operator
matrices bundled under data/ were constructed to reproduce these aggregates
exactly (see scripts/make_reference_datasets.py).
"""
from __future__ import annotations

from functools import lru_cache
from importlib import resources

from .analytics import CurvePoint, LearningCurveModel, fit_towill

LEVELS = (1, 2, 4, 8, 16, 32, 64)

# Cumulative average setup minutes at each doubling, per training mode.
TRADITIONAL_SERIES = (27.88, 27.05, 25.72, 23.69, 21.39, 18.97, 16.68)
ASSISTED_SERIES = (26.47, 24.72, 22.62, 20.45, 18.18, 15.92, 13.87)

GROUP_TRADITIONAL = "traditional"
GROUP_ASSISTED = "assisted"


@lru_cache(maxsize=None)
def reference_curves() -> tuple[LearningCurveModel, LearningCurveModel]:
    """Plateau-curve fits of the two reference series."""
    curve_a = fit_towill([CurvePoint(x, y) for x, y in zip(LEVELS, TRADITIONAL_SERIES)])
    curve_b = fit_towill([CurvePoint(x, y) for x, y in zip(LEVELS, ASSISTED_SERIES)])
    return curve_a, curve_b


def data_text(name: str) -> str:
    """Read a bundled data file (corpus, synonyms, reference datasets)."""
    return (resources.files("opnav") / "data" / name).read_text(encoding="utf-8")


def data_path(name: str) -> str:
    return str(resources.files("opnav") / "data" / name)
