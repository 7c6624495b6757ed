"""Bivariate copulas: the independence copula, both Frechet bounds, and the
Gumbel, Clayton and Frank Archimedean families.

All evaluators are vectorized over numpy arrays and return exact margins:
C(u, 0) = C(0, v) = 0, C(u, 1) = u, C(1, v) = v.
"""

from typing import Optional, Union

import numpy as np
from pydantic import ValidationError

from ownership_entropy.config import THETA_ZERO_CUTOFF
from ownership_entropy.errors import ParameterDomainError, SupportRangeError
from ownership_entropy.logging_config import get_logger
from ownership_entropy.models import (
    NONPARAMETRIC_FAMILIES,
    PARAMETRIC_FAMILIES,
    AxiomReport,
    CopulaSpec,
)

logger = get_logger(__name__)

ArrayLike = Union[float, np.ndarray]

FAMILY_ALIASES = {
    'product': 'product',
    'independence': 'product',
    'frechet-lower': 'frechet-lower',
    'lower-frechet': 'frechet-lower',
    'frechet-upper': 'frechet-upper',
    'upper-frechet': 'frechet-upper',
    'gumbel': 'gumbel',
    'clayton': 'clayton',
    'frank': 'frank',
}


def make_copula(family: str, theta: Optional[float] = None) -> CopulaSpec:
    """Build a CopulaSpec, mapping schema violations to ParameterDomainError."""
    try:
        return CopulaSpec(family=family, theta=theta)
    except ValidationError as e:
        raise ParameterDomainError(e.errors()[0]['msg'].removeprefix('Value error, ')) from None


def parse_copula_spec(text: str) -> CopulaSpec:
    """Parse `product`, `frechet-lower`, `frechet-upper`, `gumbel:2`, `clayton:-0.5`, `frank:5`."""
    name, _, raw_theta = text.strip().partition(':')
    family = FAMILY_ALIASES.get(name.strip().lower())
    if family is None:
        raise ParameterDomainError(f"Unknown copula family '{name}'.")
    if family in NONPARAMETRIC_FAMILIES:
        if raw_theta:
            raise ParameterDomainError(f"{family} takes no parameter.")
        return make_copula(family)
    if not raw_theta:
        raise ParameterDomainError(f"{family} requires a parameter, e.g. '{family}:2'.")
    try:
        theta = float(raw_theta)
    except ValueError:
        raise ParameterDomainError(f"Invalid copula parameter '{raw_theta}'.") from None
    return make_copula(family, theta)


# ============================================================================
# FAMILY FORMULAS (interior points only; margins are patched afterwards)
# ============================================================================

def _product(u, v):
    return u * v


def _lower_frechet(u, v):
    return np.maximum(u + v - 1.0, 0.0)


def _upper_frechet(u, v):
    return np.minimum(u, v)


def _gumbel(u, v, theta):
    if theta == 1.0:
        return _product(u, v)
    # (a^theta + b^theta)^(1/theta) with a = -ln u, evaluated in log space
    log_a = np.log(-np.log(u))
    log_b = np.log(-np.log(v))
    return np.exp(-np.exp(np.logaddexp(theta * log_a, theta * log_b) / theta))


def _clayton(u, v, theta):
    if theta == -1.0:
        return _lower_frechet(u, v)
    # a = u^-theta + v^-theta - 2, so the base of the outer power is 1 + a
    a = np.expm1(-theta * np.log(u)) + np.expm1(-theta * np.log(v))
    if theta > 0:
        return np.exp(-np.log1p(a) / theta)
    # max{base, 0} before the positive power -1/theta
    return np.where(a > -1.0, np.exp(-np.log1p(np.maximum(a, -1.0)) / theta), 0.0)


def _frank(u, v, theta):
    ratio = np.expm1(-theta * u) * np.expm1(-theta * v) / np.expm1(-theta)
    if theta < 0:
        return -np.log1p(ratio) / theta
    # For theta > 0 the ratio tends to -1 near (1, 1); rewrite 1 + ratio as
    # [e^(-theta u) (1 - e^(-theta v)) + e^(-theta v) (1 - e^(-theta (1 - v)))] / (1 - e^(-theta)),
    # a sum of nonnegative terms
    head = np.exp(-theta * u) * -np.expm1(-theta * v)
    tail = np.exp(-theta * v) * -np.expm1(-theta * (1.0 - v))
    log_sum = np.log(head + tail) - np.log(-np.expm1(-theta))
    return -np.where(ratio > -0.5, np.log1p(ratio), log_sum) / theta


def _interior_values(spec: CopulaSpec, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    family, theta = spec.family, spec.theta
    if family == 'product':
        return _product(u, v)
    if family == 'frechet-lower':
        return _lower_frechet(u, v)
    if family == 'frechet-upper':
        return _upper_frechet(u, v)
    if family in ('clayton', 'frank') and abs(theta) < THETA_ZERO_CUTOFF:
        return _product(u, v)
    if family == 'gumbel':
        return _gumbel(u, v, theta)
    if family == 'clayton':
        return _clayton(u, v, theta)
    return _frank(u, v, theta)


def copula_value(spec: CopulaSpec, u: ArrayLike, v: ArrayLike) -> ArrayLike:
    """Evaluate C(u, v) elementwise with numpy broadcasting.

    Raises:
        SupportRangeError: u or v outside [0, 1]
    """
    scalar = np.ndim(u) == 0 and np.ndim(v) == 0
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if not (np.all((u >= 0) & (u <= 1)) and np.all((v >= 0) & (v <= 1))):
        raise SupportRangeError("Copula arguments must lie in [0, 1].")

    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        values = _interior_values(spec, u, v)

    values = np.where(v == 1.0, u, values)
    values = np.where(u == 1.0, v, values)
    values = np.where((u == 0.0) | (v == 0.0), 0.0, values)
    values = np.clip(values, 0.0, 1.0)
    return float(values) if scalar else values


def copula_grid(spec: CopulaSpec, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Matrix of C(u[i], v[j]) over the outer product of two 1-D point sets."""
    return copula_value(spec, np.asarray(u, dtype=float)[:, None], np.asarray(v, dtype=float)[None, :])


def rectangle_volumes(values: np.ndarray) -> np.ndarray:
    """C-volumes of the grid rectangles spanned by consecutive rows and columns."""
    return values[1:, 1:] - values[:-1, 1:] - values[1:, :-1] + values[:-1, :-1]


def check_copula_axioms(spec: CopulaSpec, grid_size: int = 101) -> AxiomReport:
    """Measure how far a copula departs from the copula axioms on a uniform grid.

    Groundedness and margins compare boundary values against 0, u and v.
    2-increasingness reports the most negative rectangle volume. The Frechet
    report is the largest excursion outside [max(u+v-1, 0), min(u, v)].
    Violations are returned as data; nothing is raised.
    """
    if grid_size < 2:
        raise ParameterDomainError("grid_size must be at least 2.")
    points = np.linspace(0.0, 1.0, grid_size)
    values = copula_grid(spec, points, points)

    grounded = max(np.abs(values[0, :]).max(), np.abs(values[:, 0]).max())
    margins = max(np.abs(values[-1, :] - points).max(), np.abs(values[:, -1] - points).max())
    two_increasing = max(0.0, -rectangle_volumes(values).min())

    uu, vv = np.meshgrid(points, points, indexing='ij')
    below = _lower_frechet(uu, vv) - values
    above = values - _upper_frechet(uu, vv)
    bounds = max(0.0, below.max(), above.max())

    report = AxiomReport(
        copula=spec.label,
        grid_size=grid_size,
        groundedness=float(grounded),
        margins=float(margins),
        two_increasing=float(two_increasing),
        frechet_bounds=float(bounds),
    )
    logger.debug(f"Axiom check {spec.label} on {grid_size}x{grid_size}: worst violation {report.worst():.3g}")
    return report


def is_parametric(family: str) -> bool:
    return family in PARAMETRIC_FAMILIES
