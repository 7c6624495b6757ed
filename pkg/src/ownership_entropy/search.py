"""Deterministic scalar search: uniform grids, golden-section refinement, local extrema."""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, Tuple

import numpy as np

from ownership_entropy.config import GOLDEN_TOLERANCE

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQ = (3 - math.sqrt(5)) / 2  # 1 / phi^2


def golden_section_minimize(f: Callable[[float], float], a: float, b: float,
                            tol: float = GOLDEN_TOLERANCE) -> Tuple[float, float]:
    """Golden-section search for a minimum of f on [a, b].

    Shrinks the bracket until its width is below `tol` and returns the best
    evaluated point with its value. Assumes f is unimodal on the bracket;
    otherwise a local minimum is returned.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x)

    # Required steps to achieve tolerance
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))

    c = a + INV_PHI_SQ * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)

    for _ in range(n - 1):
        if yc < yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQ * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)

    if yc < yd:
        return c, yc
    return d, yd


def evaluate_grid(f: Callable[[float], float], points: Sequence[float], workers: int = 1) -> np.ndarray:
    """Evaluate f at every grid point; values come back in grid order."""
    points = list(points)
    if workers <= 1 or len(points) < 2:
        return np.array([f(p) for p in points], dtype=float)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(f, points)), dtype=float)


def bracket_around(points: np.ndarray, index: int) -> Tuple[float, float]:
    """Neighbouring grid points around `index`, clipped to the grid ends."""
    lo = points[max(index - 1, 0)]
    hi = points[min(index + 1, len(points) - 1)]
    return float(lo), float(hi)


def local_extrema(params: Sequence[float], values: Sequence[float]) -> List[Tuple[str, float, float]]:
    """Strict interior local minima and maxima of a sampled curve, in parameter order.

    Plateaus count once, located at their first point.
    """
    params = np.asarray(params, dtype=float)
    values = np.asarray(values, dtype=float)
    found = []
    i = 1
    while i < len(values) - 1:
        j = i
        while j + 1 < len(values) - 1 and values[j + 1] == values[i]:
            j += 1
        left, right = values[i - 1], values[j + 1]
        if values[i] > left and values[i] > right:
            found.append(('max', float(params[i]), float(values[i])))
        elif values[i] < left and values[i] < right:
            found.append(('min', float(params[i]), float(values[i])))
        i = j + 1
    return found
