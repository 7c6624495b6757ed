"""Discrete marginal degree laws on the support 1..n and their parametric fits.

Parametric laws are truncated to 1..n and renormalized:
    power law    p(j) ~ j^(-gamma)
    exponential  p(j) ~ exp(b * j)
"""

from typing import Optional, Sequence

import numpy as np
from pydantic import ValidationError
from scipy import stats
from scipy.optimize import curve_fit
from scipy.special import logsumexp

from ownership_entropy.config import (
    CONFIDENCE_LEVEL,
    MIN_FIT_POINTS,
    MLE_GAMMA_BRACKET,
    MLE_TOLERANCE,
)
from ownership_entropy.errors import (
    EmptyInputError,
    EmptySupportError,
    InsufficientDataError,
    ParameterDomainError,
    SupportRangeError,
)
from ownership_entropy.logging_config import get_logger
from ownership_entropy.models import DiscretePMF, FitReport, MarginalSpec
from ownership_entropy.search import golden_section_minimize

logger = get_logger(__name__)


def _check_support(n: int) -> int:
    if n is None or int(n) < 1:
        raise EmptySupportError(f"Support size must be at least 1, got {n}.")
    return int(n)


def _normalized_from_log_weights(log_w: np.ndarray) -> np.ndarray:
    w = np.exp(log_w - log_w.max())
    return w / w.sum()


def make_marginal(variant: str, n: int, **params) -> MarginalSpec:
    """Build a MarginalSpec, mapping schema violations to ParameterDomainError."""
    try:
        return MarginalSpec(variant=variant, n=n, **params)
    except ValidationError as e:
        raise ParameterDomainError(e.errors()[0]['msg']) from None


def parse_marginal_spec(text: str) -> MarginalSpec:
    """Parse `power_law:gamma:n`, `exponential:b:n` or `empirical:c1,c2,...`."""
    variant, _, rest = text.strip().partition(':')
    variant = variant.strip().lower().replace('-', '_')
    try:
        if variant == 'empirical':
            counts = tuple(float(c) for c in rest.split(','))
            return make_marginal('empirical', len(counts), counts=counts)
        value, _, n = rest.partition(':')
        if variant == 'power_law':
            return make_marginal('power_law', int(n), gamma=float(value))
        if variant == 'exponential':
            return make_marginal('exponential', int(n), b=float(value))
    except ValueError as e:
        if isinstance(e, ParameterDomainError):
            raise
        raise ParameterDomainError(f"Invalid marginal '{text}'.") from None
    raise ParameterDomainError(f"Unknown marginal variant '{variant}'.")


def _as_sample(sample: Sequence[int], n: Optional[int]) -> tuple:
    values = np.asarray(list(sample))
    if values.size == 0:
        raise EmptyInputError("Sample is empty.")
    if not np.all(np.equal(np.mod(values, 1), 0)):
        raise SupportRangeError("Sample values must be integers.")
    values = values.astype(int)
    n = int(values.max()) if n is None else _check_support(n)
    if values.min() < 1 or values.max() > n:
        raise SupportRangeError(f"Sample values must lie in [1..{n}].")
    return values, n


def empirical_pmf(sample: Sequence[int], n: Optional[int] = None) -> DiscretePMF:
    """Relative frequencies of a positive integer sample on 1..n (n defaults to the maximum)."""
    values, n = _as_sample(sample, n)
    counts = np.bincount(values, minlength=n + 1)[1:].astype(float)
    spec = MarginalSpec(variant="empirical", n=n, counts=tuple(counts))
    return DiscretePMF(n=n, probs=counts / counts.sum(), spec=spec)


def pmf_from_counts(counts: Sequence[float]) -> DiscretePMF:
    """Normalize nonnegative counts (or unnormalized masses) indexed 1..n."""
    counts = np.asarray(counts, dtype=float)
    spec = make_marginal("empirical", counts.size, counts=tuple(counts))
    return DiscretePMF(n=spec.n, probs=counts / counts.sum(), spec=spec)


def power_law_pmf(gamma: float, n: int, allow_nonincreasing: bool = False) -> DiscretePMF:
    """Truncated power law p(j) = j^-gamma / sum_m m^-gamma on 1..n.

    gamma <= 0 (flat or rising weights) is accepted only with
    allow_nonincreasing, which entropy surfaces use to scan across the flat point.
    """
    n = _check_support(n)
    if not gamma > 0 and not allow_nonincreasing:
        raise ParameterDomainError(f"power law requires gamma > 0, got {gamma}.")
    probs = _normalized_from_log_weights(-gamma * np.log(np.arange(1, n + 1)))
    spec = MarginalSpec(variant="power_law", n=n, gamma=gamma) if gamma > 0 else None
    return DiscretePMF(n=n, probs=probs, spec=spec)


def exponential_pmf(b: float, n: int, allow_nonnegative: bool = False) -> DiscretePMF:
    """Truncated exponential p(j) = exp(b*j) / sum_m exp(b*m) on 1..n."""
    n = _check_support(n)
    if not b < 0 and not allow_nonnegative:
        raise ParameterDomainError(f"exponential law requires b < 0, got {b}.")
    probs = _normalized_from_log_weights(b * np.arange(1, n + 1, dtype=float))
    spec = MarginalSpec(variant="exponential", n=n, b=b) if b < 0 else None
    return DiscretePMF(n=n, probs=probs, spec=spec)


def cdf(pmf: DiscretePMF) -> np.ndarray:
    """CDF values at 0..n: result[0] = 0, result[i] = P(K <= i), result[n] = 1."""
    out = np.concatenate(([0.0], np.cumsum(pmf.probs)))
    out = np.clip(out, 0.0, 1.0)
    out[-1] = 1.0
    return out


def survival(pmf: DiscretePMF) -> np.ndarray:
    """Survival values at 1..n: result[x-1] = P(K >= x)."""
    return np.cumsum(pmf.probs[::-1])[::-1]


def realize(spec: MarginalSpec) -> DiscretePMF:
    """Materialize the PMF a MarginalSpec describes."""
    if spec.variant == "power_law":
        return power_law_pmf(spec.gamma, spec.n)
    if spec.variant == "exponential":
        return exponential_pmf(spec.b, spec.n)
    counts = np.asarray(spec.counts, dtype=float)
    return DiscretePMF(n=spec.n, probs=counts / counts.sum(), spec=spec)


def sample_pmf(pmf: DiscretePMF, size: int, seed: Optional[int] = None) -> np.ndarray:
    """Draw `size` integers from the PMF with a seeded generator."""
    rng = np.random.default_rng(seed)
    return rng.choice(np.arange(1, pmf.n + 1), size=size, p=pmf.probs)


def marginal_spec_from_fit(report: FitReport, n: int) -> MarginalSpec:
    """Turn a fitted estimate into the parametric MarginalSpec it describes."""
    if report.family == "power_law":
        return make_marginal("power_law", n, gamma=report.estimate)
    return make_marginal("exponential", n, b=report.estimate)


# ============================================================================
# LEAST-SQUARES FITS
# ============================================================================

def _t_quantile(dof: int) -> float:
    return float(stats.t.ppf(0.5 + CONFIDENCE_LEVEL / 2, max(dof, 1)))


def _log_linear_fit(x: np.ndarray, y: np.ndarray, model, transform):
    """Fit log(y) = intercept + slope * transform(x); fall back to curve_fit when y has zeros.

    Returns (intercept, slope, slope_stderr) in log-amplitude form.
    """
    positive = y > 0
    if positive.sum() < MIN_FIT_POINTS:
        raise InsufficientDataError(
            f"Need at least {MIN_FIT_POINTS} strictly positive points, found {int(positive.sum())}."
        )

    line = stats.linregress(transform(x[positive]), np.log(y[positive]))
    if positive.all():
        return line.intercept, line.slope, line.stderr

    # Zeros cannot be log-transformed: minimize squared error on raw values
    def raw_model(xv, log_amp, slope):
        return model(xv, np.exp(log_amp), slope)

    try:
        params, cov = curve_fit(raw_model, x, y, p0=(line.intercept, line.slope), maxfev=20000)
        stderr = float(np.sqrt(np.diag(cov))[1]) if np.all(np.isfinite(cov)) else float('nan')
        return float(params[0]), float(params[1]), stderr
    except RuntimeError:
        logger.warning("Nonlinear least squares did not converge; keeping the log-linear estimate")
        return line.intercept, line.slope, line.stderr


def _interval(estimate: float, stderr: float, dof: int):
    if not np.isfinite(stderr):
        return None
    half = _t_quantile(dof) * stderr
    return (estimate - half, estimate + half)


def fit_power_law_ls(pmf: DiscretePMF, target: str = "density") -> FitReport:
    """Least-squares power-law fit of the PMF (density) or of its survival function.

    density:  pmf[j] ~ c * j^-gamma
    survival: P(K >= x) ~ c * x^(1-gamma)
    """
    if target not in ("density", "survival"):
        raise ValueError(f"Unknown fit target '{target}'.")
    if int((pmf.probs > 0).sum()) < MIN_FIT_POINTS:
        raise InsufficientDataError(f"Need at least {MIN_FIT_POINTS} strictly positive PMF entries.")

    x = np.arange(1, pmf.n + 1, dtype=float)
    y = pmf.probs if target == "density" else survival(pmf)

    def model(xv, amp, slope):
        return amp * np.power(xv, slope)

    log_amp, slope, stderr = _log_linear_fit(x, y, model, np.log)
    gamma = -slope if target == "density" else 1.0 - slope
    amplitude = float(np.exp(log_amp))
    rmse = float(np.sqrt(np.mean((y - model(x, amplitude, slope)) ** 2)))

    report = FitReport(
        family="power_law",
        method="least_squares_pmf" if target == "density" else "least_squares_survival",
        estimate=float(gamma),
        interval=_interval(float(gamma), stderr, pmf.n - 2),
        goodness=rmse,
        goodness_kind="rmse",
        amplitude=amplitude,
        boundary=bool(gamma <= 0),
        n_points=pmf.n,
    )
    logger.info(f"Power-law {target} fit: gamma={gamma:.6g}, RMSE={rmse:.4g}")
    return report


def fit_exponential_ls(pmf: DiscretePMF) -> FitReport:
    """Least-squares fit pmf[j] ~ a * exp(b * j); a is a free amplitude."""
    if int((pmf.probs > 0).sum()) < MIN_FIT_POINTS:
        raise InsufficientDataError(f"Need at least {MIN_FIT_POINTS} strictly positive PMF entries.")

    x = np.arange(1, pmf.n + 1, dtype=float)
    y = pmf.probs

    def model(xv, amp, rate):
        return amp * np.exp(rate * xv)

    log_amp, b, stderr = _log_linear_fit(x, y, model, lambda v: v)
    amplitude = float(np.exp(log_amp))
    rmse = float(np.sqrt(np.mean((y - model(x, amplitude, b)) ** 2)))

    # Decaying laws only; a flat or rising fit sits on the edge of the family
    boundary = bool(b >= -1e-9)
    if boundary:
        logger.warning(f"Exponential fit is not decaying (b={b:.3g}); flagged as boundary")
    logger.info(f"Exponential fit: b={b:.6g}, a={amplitude:.4g}, RMSE={rmse:.4g}")
    return FitReport(
        family="exponential",
        method="least_squares_pmf",
        estimate=float(b),
        interval=_interval(float(b), stderr, pmf.n - 2),
        goodness=rmse,
        goodness_kind="rmse",
        amplitude=amplitude,
        boundary=boundary,
        n_points=pmf.n,
    )


# ============================================================================
# MAXIMUM LIKELIHOOD
# ============================================================================

def power_law_log_likelihood(gamma: float, sample: Sequence[int], n: int) -> float:
    """Sum of log power_law_pmf(gamma, n)[x_i] over the sample."""
    values = np.asarray(sample, dtype=float)
    log_support = np.log(np.arange(1, n + 1, dtype=float))
    log_z = logsumexp(-gamma * log_support)
    return float(-gamma * np.log(values).sum() - values.size * log_z)


def fit_power_law_mle(sample: Sequence[int], n: Optional[int] = None) -> FitReport:
    """Maximum-likelihood exponent of the truncated power law on 1..n.

    Golden-section search over the bracket (0.01, 10]; an optimum at either
    end of the bracket is flagged as a boundary estimate.
    """
    values, n = _as_sample(sample, n)
    lo, hi = MLE_GAMMA_BRACKET
    log_values_sum = float(np.log(values).sum())
    log_support = np.log(np.arange(1, n + 1, dtype=float))

    def nll(gamma):
        return gamma * log_values_sum + values.size * logsumexp(-gamma * log_support)

    gamma, best = golden_section_minimize(nll, lo, hi, tol=MLE_TOLERANCE)
    boundary = False
    # A flat likelihood (every observation at 1, or n = 1) resolves to the upper edge
    hi_value = nll(hi)
    if hi_value <= best:
        gamma, best, boundary = hi, hi_value, True
    lo_value = nll(lo)
    if lo_value < best:
        gamma, best, boundary = lo, lo_value, True
    if min(gamma - lo, hi - gamma) < 10 * MLE_TOLERANCE:
        boundary = True

    interval = None
    if not boundary:
        # Observed information of an exponential family: N * Var_gamma(log J)
        probs = power_law_pmf(gamma, n).probs
        mean = float(probs @ log_support)
        variance = float(probs @ (log_support - mean) ** 2)
        if variance > 0:
            half = float(stats.norm.ppf(0.5 + CONFIDENCE_LEVEL / 2)) / np.sqrt(values.size * variance)
            interval = (gamma - half, gamma + half)
    else:
        logger.warning(f"Power-law MLE hit the search bracket at gamma={gamma:g}")

    logger.info(f"Power-law MLE: gamma={gamma:.6g} from {values.size} observation(s)")
    return FitReport(
        family="power_law",
        method="mle",
        estimate=float(gamma),
        interval=interval,
        goodness=float(-best),
        goodness_kind="log_likelihood",
        boundary=boundary,
        n_points=int(values.size),
    )
