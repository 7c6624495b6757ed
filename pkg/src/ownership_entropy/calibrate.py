"""Parameter scans and calibrations of copula-coupled degree laws.

Three drivers:
    minimize_distance   theta closest (Frobenius) to a target joint
    extremize_entropy   theta with the largest or smallest joint entropy
    entropy_surface     entropy over a (marginal exponent k, theta) grid

Every optimization is a deterministic coarse grid per connected theta-branch
followed by golden-section refinement inside the best grid cell.
"""

from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from ownership_entropy.config import (
    CLOSED_THETA_EDGES,
    COARSE_POINTS,
    DEFAULT_THETA_WINDOWS,
    DEFAULT_WORKERS,
    EDGE_FRACTION,
    GOLDEN_TOLERANCE,
    OPEN_ENDPOINT_INSET,
    REPORT_THETA_STEPS,
    THETA_ZERO_CUTOFF,
)
from ownership_entropy.copulas import is_parametric, make_copula
from ownership_entropy.errors import ConfigurationError
from ownership_entropy.logging_config import get_logger
from ownership_entropy.marginals import (
    exponential_pmf,
    make_marginal,
    power_law_pmf,
    realize,
)
from ownership_entropy.measures import euclidean_distance, shannon_entropy
from ownership_entropy.models import (
    CalibrationResult,
    DiscretePMF,
    Extremum,
    GridSpec,
    JointPMF,
    MarginalSpec,
    ScanResult,
    SliceExtrema,
    SurfaceResult,
)
from ownership_entropy.search import (
    bracket_around,
    evaluate_grid,
    golden_section_minimize,
    local_extrema,
)
from ownership_entropy.sklar import joint_from_copula

logger = get_logger(__name__)

OBJECTIVES = ('entropy', 'distance')
BRANCHES = ('both', 'negative', 'positive')

# (k_out, k_in) marginal variants of the five Case 3 steps; None keeps the raw data
CASE3_STEPS = {
    1: ('power_law', None),
    2: (None, 'power_law'),
    3: (None, 'exponential'),
    4: ('power_law', 'power_law'),
    5: ('power_law', 'exponential'),
}

GridLike = Union[GridSpec, Tuple[float, float, int]]


def make_grid(lo: float, hi: float, steps: int) -> GridSpec:
    try:
        return GridSpec(lo=lo, hi=hi, steps=steps)
    except ValidationError as e:
        raise ConfigurationError(e.errors()[0]['msg'].removeprefix('Value error, ')) from None


def parse_grid(text: str) -> GridSpec:
    """Parse `lo:hi:steps`, e.g. `1:10:100`."""
    parts = text.split(':')
    if len(parts) != 3:
        raise ConfigurationError(f"Grid '{text}' must look like lo:hi:steps.")
    try:
        return make_grid(float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError:
        raise ConfigurationError(f"Grid '{text}' has a non-numeric part.") from None


def parse_window(text: str) -> Tuple[float, float]:
    """Parse `lo:hi`, e.g. `-1:-0.05`."""
    parts = text.split(':')
    if len(parts) != 2:
        raise ConfigurationError(f"Window '{text}' must look like lo:hi.")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise ConfigurationError(f"Window '{text}' has a non-numeric part.") from None
    if not lo < hi:
        raise ConfigurationError(f"Window '{text}' requires lo < hi.")
    return lo, hi


def _as_grid(grid: GridLike) -> GridSpec:
    return grid if isinstance(grid, GridSpec) else make_grid(*grid)


def _require_parametric(family: str):
    if not is_parametric(family):
        raise ConfigurationError(f"Copula family '{family}' has no parameter to scan.")


def theta_branches(family: str, window: Optional[Tuple[float, float]] = None,
                   branch: str = 'both') -> Tuple[Tuple[float, float], ...]:
    """Connected theta intervals to search, ascending.

    Clayton and Frank windows that contain 0 are split into a negative and a
    positive branch, each kept OPEN_ENDPOINT_INSET away from 0.
    """
    _require_parametric(family)
    if branch not in BRANCHES:
        raise ConfigurationError(f"Unknown branch '{branch}' (expected one of {', '.join(BRANCHES)}).")

    if window is None:
        branches = list(DEFAULT_THETA_WINDOWS[family])
    else:
        lo, hi = window
        if not lo < hi:
            raise ConfigurationError("Theta window requires lo < hi.")
        if family == 'gumbel':
            if lo < 1.0:
                raise ConfigurationError("Gumbel theta window must start at 1 or above.")
            branches = [(lo, hi)]
        else:
            if family == 'clayton' and lo < -1.0:
                raise ConfigurationError("Clayton theta window must start at -1 or above.")
            branches = []
            if lo < -OPEN_ENDPOINT_INSET:
                branches.append((lo, min(hi, -OPEN_ENDPOINT_INSET)))
            if hi > OPEN_ENDPOINT_INSET:
                branches.append((max(lo, OPEN_ENDPOINT_INSET), hi))

    if branch == 'negative':
        branches = [b for b in branches if b[1] <= 0]
    elif branch == 'positive':
        branches = [b for b in branches if b[0] >= 0]
    if not branches:
        raise ConfigurationError(f"No {branch} theta branch for {family} in window {window}.")
    return tuple(branches)


def admissible_thetas(family: str, points: Sequence[float]) -> np.ndarray:
    """Grid points inside the family domain; the excluded point theta = 0 is skipped."""
    _require_parametric(family)
    points = np.asarray(points, dtype=float)
    floor = {'gumbel': 1.0, 'clayton': -1.0}.get(family)
    if floor is not None and points.min() < floor:
        raise ConfigurationError(f"{family} theta grid must stay at or above {floor:g}.")
    if family in ('clayton', 'frank'):
        kept = points[np.abs(points) >= THETA_ZERO_CUTOFF]
        if kept.size < points.size:
            logger.debug(f"{family} grid split at theta = 0")
        points = kept
    return points


def _objective_fn(family: str, pmf_in: DiscretePMF, pmf_out: DiscretePMF, objective: str,
                  target: Optional[JointPMF], alarms: List[str]) -> Callable[[float], float]:
    if objective not in OBJECTIVES:
        raise ConfigurationError(f"Unknown objective '{objective}'.")
    if objective == 'distance' and target is None:
        raise ConfigurationError("The distance objective needs a target joint.")

    def evaluate(theta: float) -> float:
        joint = joint_from_copula(make_copula(family, float(theta)), pmf_in, pmf_out)
        if joint.alarms:
            alarms.extend(joint.alarms)
        if objective == 'entropy':
            return shannon_entropy(joint)
        return euclidean_distance(joint, target)

    return evaluate


def scan_theta(family: str, pmf_in: DiscretePMF, pmf_out: DiscretePMF, objective: str = 'entropy',
               grid: Optional[GridLike] = None, target: Optional[JointPMF] = None,
               workers: int = DEFAULT_WORKERS) -> ScanResult:
    """Objective at every theta of a grid (default: every default branch at COARSE_POINTS)."""
    alarms: List[str] = []
    f = _objective_fn(family, pmf_in, pmf_out, objective, target, alarms)
    if grid is None:
        points = np.concatenate([np.linspace(lo, hi, COARSE_POINTS) for lo, hi in theta_branches(family)])
    else:
        points = admissible_thetas(family, _as_grid(grid).points())

    values = evaluate_grid(f, points, workers)
    logger.info(f"Scanned {family} {objective} at {points.size} theta value(s)")
    return ScanResult(
        axes=('theta',),
        objective=objective,
        points=points[:, None],
        values=values,
        alarms=tuple(sorted(set(alarms))),
    )


def _locate(family: str, theta: float, lo: float, hi: float, coarse_points: int) -> str:
    """interior, boundary (closed domain edge) or asymptotic-no-optimum (open edge).

    The refined theta counts as sitting on an edge when it lies within
    EDGE_FRACTION of one coarse grid cell of it, and never closer than the
    golden-section resolution allows.
    """
    cell = (hi - lo) / (coarse_points - 1)
    margin = max(EDGE_FRACTION * cell, 10 * GOLDEN_TOLERANCE)
    for edge in (lo, hi):
        if abs(theta - edge) <= margin:
            return 'boundary' if edge in CLOSED_THETA_EDGES[family] else 'asymptotic-no-optimum'
    return 'interior'


def _calibrate(family: str, pmf_in: DiscretePMF, pmf_out: DiscretePMF, objective: str, goal: str,
               target: Optional[JointPMF], window: Optional[Tuple[float, float]], branch: str,
               coarse_points: Optional[int], workers: int) -> CalibrationResult:
    if goal not in ('min', 'max'):
        raise ConfigurationError(f"goal must be 'min' or 'max', got '{goal}'.")
    coarse_points = coarse_points or COARSE_POINTS
    if coarse_points < 3:
        raise ConfigurationError("At least 3 coarse grid points are needed per branch.")

    branches = theta_branches(family, window, branch)
    alarms: List[str] = []
    f = _objective_fn(family, pmf_in, pmf_out, objective, target, alarms)
    sign = 1.0 if goal == 'min' else -1.0

    best = None
    best_coarse = None
    trace_points, trace_values, extrema = [], [], []
    for lo, hi in branches:
        grid = np.linspace(lo, hi, coarse_points)
        values = evaluate_grid(f, grid, workers)
        idx = int(np.argmin(sign * values))
        coarse_theta, coarse_value = float(grid[idx]), float(values[idx])

        a, b = bracket_around(grid, idx)
        refined_theta, signed = golden_section_minimize(lambda t: sign * f(t), a, b, tol=GOLDEN_TOLERANCE)
        if signed <= sign * coarse_value:
            theta, value = refined_theta, sign * signed
        else:
            theta, value = coarse_theta, coarse_value

        location = _locate(family, theta, lo, hi, coarse_points)
        logger.debug(f"{family} branch [{lo:g}, {hi:g}]: theta={theta:.9g}, {objective}={value:.9g} ({location})")

        if best is None or sign * value < sign * best[1]:
            best = (theta, value, location)
        if best_coarse is None or sign * coarse_value < sign * best_coarse:
            best_coarse = coarse_value

        trace_points.extend(grid)
        trace_values.extend(values)
        extrema.extend(Extremum(kind=k, parameter=p, value=v) for k, p, v in local_extrema(grid, values))

    theta, value, location = best
    message = f"{family} {goal} {objective}: theta*={theta:.9g}, value={value:.9g} ({location})"
    if location == 'interior':
        logger.info(message)
    else:
        logger.warning(message)

    return CalibrationResult(
        family=family,
        objective=objective,
        goal=goal,
        theta_star=theta,
        value=value,
        coarse_value=best_coarse,
        location=location,
        window=branches,
        local_extrema=tuple(extrema),
        trace=ScanResult(
            axes=('theta',),
            objective=objective,
            points=np.asarray(trace_points)[:, None],
            values=np.asarray(trace_values),
            alarms=tuple(sorted(set(alarms))),
        ),
    )


def minimize_distance(family: str, pmf_in: DiscretePMF, pmf_out: DiscretePMF, target: JointPMF,
                      window: Optional[Tuple[float, float]] = None, branch: str = 'both',
                      coarse_points: Optional[int] = None,
                      workers: int = DEFAULT_WORKERS) -> CalibrationResult:
    """Theta whose copula joint is closest to `target`.

    Optima on a window edge are labelled boundary (closed domain
    edge: Gumbel 1, Clayton -1) or asymptotic-no-optimum (any other edge).
    """
    return _calibrate(family, pmf_in, pmf_out, 'distance', 'min', target, window, branch,
                      coarse_points, workers)


def extremize_entropy(family: str, pmf_in: DiscretePMF, pmf_out: DiscretePMF, goal: str = 'max',
                      window: Optional[Tuple[float, float]] = None, branch: str = 'both',
                      coarse_points: Optional[int] = None,
                      workers: int = DEFAULT_WORKERS) -> CalibrationResult:
    """Theta with the largest (goal='max') or smallest joint entropy."""
    return _calibrate(family, pmf_in, pmf_out, 'entropy', goal, None, window, branch,
                      coarse_points, workers)


# ============================================================================
# CASE 3: ENTROPY SURFACES OVER (k, theta)
# ============================================================================

def _empirical_spec(pmf: Union[DiscretePMF, MarginalSpec]) -> MarginalSpec:
    if isinstance(pmf, MarginalSpec):
        return pmf
    if pmf.spec is not None and pmf.spec.variant == 'empirical':
        return pmf.spec
    return make_marginal('empirical', pmf.n, counts=tuple(float(p) for p in pmf.probs))


def case3_step(step: int, empirical_in: Union[DiscretePMF, MarginalSpec],
               empirical_out: Union[DiscretePMF, MarginalSpec]) -> Tuple[MarginalSpec, MarginalSpec]:
    """(out_spec, in_spec) for one of the five Case 3 steps.

    Parametric specs carry placeholder parameters; entropy_surface replaces
    them with the scanned k (power law gamma = k, exponential rate b = -k).
    """
    if step not in CASE3_STEPS:
        raise ConfigurationError(f"Case 3 step must be 1..5, got {step}.")
    raw_out, raw_in = _empirical_spec(empirical_out), _empirical_spec(empirical_in)
    out_variant, in_variant = CASE3_STEPS[step]

    def template(variant, raw):
        if variant is None:
            return raw
        if variant == 'power_law':
            return make_marginal('power_law', raw.n, gamma=1.0)
        return make_marginal('exponential', raw.n, b=-1.0)

    return template(out_variant, raw_out), template(in_variant, raw_in)


def _marginal_at(spec: MarginalSpec, k: float) -> DiscretePMF:
    if spec.variant == 'power_law':
        return power_law_pmf(k, spec.n, allow_nonincreasing=True)
    if spec.variant == 'exponential':
        return exponential_pmf(-k, spec.n, allow_nonnegative=True)
    return realize(spec)


def _default_theta_points(family: str) -> np.ndarray:
    return np.concatenate([np.linspace(lo, hi, REPORT_THETA_STEPS) for lo, hi in theta_branches(family)])


def entropy_surface(out_spec: MarginalSpec, in_spec: MarginalSpec, family: str, grid_k: GridLike,
                    grid_theta: Optional[GridLike] = None, allow_nonincreasing: bool = False,
                    workers: int = DEFAULT_WORKERS) -> SurfaceResult:
    """Joint entropy over a grid of the shared marginal exponent k and, for
    parametric copulas, theta.

    Every parametric marginal spec takes the scanned k. Nonparametric copulas
    produce a curve in k only and reject a theta grid.
    """
    if not any(s.variant != 'empirical' for s in (out_spec, in_spec)):
        raise ConfigurationError("At least one marginal must be parametric to scan k.")
    k_points = _as_grid(grid_k).points()
    if not allow_nonincreasing and k_points.min() <= 0:
        raise ConfigurationError("k grid must stay above 0 unless nonincreasing marginals are allowed.")

    parametric = is_parametric(family)
    if parametric:
        theta_points = _default_theta_points(family) if grid_theta is None \
            else admissible_thetas(family, _as_grid(grid_theta).points())
    elif grid_theta is not None:
        raise ConfigurationError(f"Copula family '{family}' takes no theta grid.")
    else:
        theta_points = np.array([np.nan])

    marginals = [(_marginal_at(in_spec, k), _marginal_at(out_spec, k)) for k in k_points]
    cells = [(i, t) for i in range(k_points.size) for t in theta_points]
    alarms: List[str] = []

    def evaluate(cell):
        i, theta = cell
        spec = make_copula(family, float(theta)) if parametric else make_copula(family)
        joint = joint_from_copula(spec, *marginals[i])
        if joint.alarms:
            alarms.extend(joint.alarms)
        return shannon_entropy(joint)

    values = evaluate_grid(evaluate, cells, workers).reshape(k_points.size, theta_points.size)

    per_k = []
    for k, row in zip(k_points, values):
        imax, imin = int(np.argmax(row)), int(np.argmin(row))
        per_k.append(SliceExtrema(
            k=float(k),
            theta_at_max=float(theta_points[imax]) if parametric else None,
            h_max=float(row[imax]),
            theta_at_min=float(theta_points[imin]) if parametric else None,
            h_min=float(row[imin]),
        ))

    h_max = values.max(axis=1)
    top = int(np.argmax(h_max))
    tail = h_max[k_points >= 1.0]
    decreasing = bool(np.all(np.diff(tail) <= 1e-12))

    if parametric:
        axes = ('k', 'theta')
        points = np.array([(k, t) for k in k_points for t in theta_points])
    else:
        axes = ('k',)
        points = k_points[:, None]

    logger.info(
        f"Entropy surface {family} ({out_spec.variant} k_out, {in_spec.variant} k_in): "
        f"max H={h_max[top]:.6g} at k={k_points[top]:.6g}"
    )
    trace = ScanResult(
        axes=axes,
        objective='entropy',
        points=points,
        values=values.ravel(),
        alarms=tuple(sorted(set(alarms))),
    )
    extrema = tuple(Extremum(kind=k, parameter=p, value=v) for k, p, v in local_extrema(k_points, h_max))
    # A maximum on either end of the k grid has not been bracketed
    bracketed = 0 < top < len(k_points) - 1
    optimum = CalibrationResult(
        family=family,
        objective='entropy',
        goal='max',
        theta_star=per_k[top].theta_at_max,
        k_star=float(k_points[top]),
        value=float(h_max[top]),
        coarse_value=float(h_max[top]),
        location='interior' if bracketed else 'asymptotic-no-optimum',
        window=((float(k_points[0]), float(k_points[-1])),),
        local_extrema=extrema,
        trace=trace,
    )
    return SurfaceResult(
        family=family,
        trace=trace,
        per_k=tuple(per_k),
        k_at_max=optimum.k_star,
        h_at_max=optimum.value,
        decreasing_for_k_at_least_one=decreasing,
        local_extrema=extrema,
        optimum=optimum,
    )
