"""Boundary polylines between class regions of a scan (marching squares, no smoothing)."""

from __future__ import annotations

import numpy as np
from skimage import measure

from .atlas import ScanResult


def _to_params(result: ScanResult, contour: np.ndarray) -> np.ndarray:
    a1, a2 = result.config.axis1, result.config.axis2
    out = np.empty_like(contour)
    out[:, 0] = a1.lo + contour[:, 0] * a1.step
    out[:, 1] = a2.lo + contour[:, 1] * a2.step
    return out


def mask_boundaries(result: ScanResult, mask: np.ndarray) -> list[np.ndarray]:
    """Level-1/2 contours of a boolean cell mask, in parameter coordinates."""
    m = np.asarray(mask, dtype=float)
    if m.min() == m.max():
        return []
    return [_to_params(result, c) for c in measure.find_contours(m, 0.5)]


def extract_boundaries(result: ScanResult) -> dict[str, list[np.ndarray]]:
    """Outline of every class region, keyed by class (e.g. ``Periodic{1}``).

    Vertices fall at midpoints between a cell in the region and its neighbour
    outside it.  A grid holding a single class yields an empty dict.
    """
    lab, keys = result.label_grid()
    if len(keys) < 2:
        return {}
    names = {}
    for row in result.cells:
        for c in row:
            names.setdefault(c.cls.key(), str(c.cls))
    out: dict[str, list[np.ndarray]] = {}
    for idx, key in enumerate(keys):
        lines = mask_boundaries(result, lab == idx)
        if lines:
            out[names[key]] = lines
    return out


def periodic_mask(result: ScanResult, period: int | None = None) -> np.ndarray:
    return np.array(
        [[c.cls.tag == "Periodic" and (period is None or c.cls.period == period) for c in row] for row in result.cells]
    )
