from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Dict, Literal, Optional, Tuple
import math
import numpy as np

from ownership_entropy.config import (
    CLAMP_TOLERANCE,
    MASS_TOLERANCE,
    PMF_TOLERANCE,
)

CopulaFamily = Literal["product", "frechet-lower", "frechet-upper", "gumbel", "clayton", "frank"]
PARAMETRIC_FAMILIES = ("gumbel", "clayton", "frank")
NONPARAMETRIC_FAMILIES = ("product", "frechet-lower", "frechet-upper")
Location = Literal["interior", "boundary", "asymptotic-no-optimum"]


def _frozen_array(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-dimensional array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


class EnvConfig(BaseModel):
    """Schema for environment variables validation."""
    log_level: str = "INFO"
    log_file: str = Field("ownership_entropy.log", min_length=1)
    workers: int = Field(1, ge=1, le=64)
    coarse_points: int = Field(256, ge=8, le=100_000)

    @field_validator('log_level')
    @classmethod
    def level_must_be_known(cls, v: str) -> str:
        v = v.strip().upper()
        if v not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            raise ValueError('Invalid log level.')
        return v


class EdgeRow(BaseModel):
    """One parsed line of an ownership edge list."""
    model_config = ConfigDict(populate_by_name=True)

    owner: str = Field(..., alias="Owner", min_length=1, max_length=256)
    owned: str = Field(..., alias="Owned", min_length=1, max_length=256)
    weight: Optional[float] = Field(None, alias="Weight")

    @field_validator('owner', 'owned', mode='before')
    @classmethod
    def token_must_be_plain(cls, v):
        # Company names may contain spaces; tabs and other control characters may not
        if not isinstance(v, str) or not v.strip():
            raise ValueError('Empty node token.')
        v = v.strip()
        if not v.isprintable():
            raise ValueError('Node token contains a control character.')
        return v

    @field_validator('weight', mode='before')
    @classmethod
    def weight_must_be_numeric(cls, v):
        if v is None or (isinstance(v, str) and not v.strip()):
            return None
        try:
            return float(v)
        except (TypeError, ValueError):
            raise ValueError('Invalid ownership weight.')


class EdgeList(BaseModel):
    """Normalized directed ownership edges (owner -> owned)."""
    model_config = ConfigDict(frozen=True)

    edges: Tuple[Tuple[str, str], ...]
    self_loops_dropped: int = Field(0, ge=0)
    duplicates_dropped: int = Field(0, ge=0)

    @model_validator(mode='after')
    def must_be_normalized(self):
        if any(owner == owned for owner, owned in self.edges):
            raise ValueError('Edge list contains a self-loop.')
        if len(set(self.edges)) != len(self.edges):
            raise ValueError('Edge list contains duplicate edges.')
        return self


class DegreeRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    node_id: str
    k_in: int = Field(..., ge=0)
    k_out: int = Field(..., ge=0)


class DegreeSample(BaseModel):
    """Paired (k_in, k_out) observations with both degrees positive."""
    model_config = ConfigDict(frozen=True)

    pairs: Tuple[Tuple[int, int], ...] = Field(..., min_length=1)
    n_in_max: int = Field(..., ge=1)
    n_out_max: int = Field(..., ge=1)

    @model_validator(mode='after')
    def pairs_within_support(self):
        for k_in, k_out in self.pairs:
            if not (1 <= k_in <= self.n_in_max and 1 <= k_out <= self.n_out_max):
                raise ValueError(
                    f'Pair ({k_in}, {k_out}) outside [1..{self.n_in_max}]x[1..{self.n_out_max}].'
                )
        return self


class MarginalSamples(BaseModel):
    """Independent univariate degree samples (strictly positive values only)."""
    model_config = ConfigDict(frozen=True)

    k_in: Tuple[int, ...] = Field(..., min_length=1)
    k_out: Tuple[int, ...] = Field(..., min_length=1)


class MarginalSpec(BaseModel):
    """Description of a marginal law on the support 1..n."""
    model_config = ConfigDict(frozen=True)

    variant: Literal["empirical", "power_law", "exponential"]
    n: int = Field(..., ge=1)
    counts: Optional[Tuple[float, ...]] = None
    gamma: Optional[float] = None
    b: Optional[float] = None

    @model_validator(mode='after')
    def parameters_match_variant(self):
        if self.variant == "power_law":
            if self.gamma is None or not self.gamma > 0:
                raise ValueError('power_law requires gamma > 0.')
        elif self.variant == "exponential":
            if self.b is None or not self.b < 0:
                raise ValueError('exponential requires b < 0.')
        else:
            if self.counts is None or len(self.counts) != self.n:
                raise ValueError('empirical requires n counts.')
            if any(c < 0 for c in self.counts) or sum(self.counts) <= 0:
                raise ValueError('empirical counts must be nonnegative with positive total.')
        return self

    @property
    def label(self) -> str:
        if self.variant == "power_law":
            return f"power_law:{self.gamma:g}:{self.n}"
        if self.variant == "exponential":
            return f"exponential:{self.b:g}:{self.n}"
        return f"empirical:{self.n}"


class DiscretePMF(BaseModel):
    """Probability mass over the integer support 1..n (probs[j-1] = P(K=j))."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(..., ge=1)
    probs: np.ndarray
    spec: Optional[MarginalSpec] = None

    @field_validator('probs', mode='before')
    @classmethod
    def as_vector(cls, v):
        return _frozen_array(v, 1)

    @model_validator(mode='after')
    def must_be_distribution(self):
        if self.probs.shape != (self.n,):
            raise ValueError(f'probs has {self.probs.size} entries, expected {self.n}.')
        if not np.all(np.isfinite(self.probs)) or np.any(self.probs < 0):
            raise ValueError('probs must be finite and nonnegative.')
        if abs(float(self.probs.sum()) - 1.0) > PMF_TOLERANCE:
            raise ValueError('probs must sum to 1.')
        return self


class CopulaSpec(BaseModel):
    """One of the six copula families with its parameter theta."""
    model_config = ConfigDict(frozen=True)

    family: CopulaFamily
    theta: Optional[float] = None

    @model_validator(mode='after')
    def theta_in_family_domain(self):
        if self.family in NONPARAMETRIC_FAMILIES:
            if self.theta is not None:
                raise ValueError(f'{self.family} takes no parameter.')
            return self
        if self.theta is None or not math.isfinite(self.theta):
            raise ValueError(f'{self.family} requires a finite theta.')
        if self.family == "gumbel" and self.theta < 1:
            raise ValueError('gumbel requires theta in [1, inf).')
        if self.family == "clayton" and (self.theta < -1 or self.theta == 0):
            raise ValueError('clayton requires theta in [-1, 0) or (0, inf).')
        if self.family == "frank" and self.theta == 0:
            raise ValueError('frank requires theta != 0.')
        return self

    @property
    def label(self) -> str:
        if self.theta is None:
            return self.family
        return f"{self.family}:{self.theta:g}"


class JointPMF(BaseModel):
    """Joint law of (k_in, k_out); mass[i-1, j-1] = P(k_in=i, k_out=j)."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n_in: int = Field(..., ge=1)
    n_out: int = Field(..., ge=1)
    mass: np.ndarray
    alarms: Tuple[str, ...] = ()

    @field_validator('mass', mode='before')
    @classmethod
    def as_matrix(cls, v):
        return _frozen_array(v, 2)

    @model_validator(mode='after')
    def must_be_distribution(self):
        if self.mass.shape != (self.n_in, self.n_out):
            raise ValueError(f'mass has shape {self.mass.shape}, expected ({self.n_in}, {self.n_out}).')
        if not np.all(np.isfinite(self.mass)) or np.any(self.mass < -CLAMP_TOLERANCE):
            raise ValueError('mass cells must be finite and nonnegative.')
        if abs(float(self.mass.sum()) - 1.0) > MASS_TOLERANCE:
            raise ValueError('total mass must be 1.')
        return self


class AxiomReport(BaseModel):
    """Worst violation of each copula axiom on a uniform grid (0 means satisfied)."""
    model_config = ConfigDict(frozen=True)

    copula: str
    grid_size: int = Field(..., ge=2)
    groundedness: float = Field(..., ge=0)
    margins: float = Field(..., ge=0)
    two_increasing: float = Field(..., ge=0)
    frechet_bounds: float = Field(..., ge=0)

    def worst(self) -> float:
        return max(self.groundedness, self.margins, self.two_increasing, self.frechet_bounds)

    def passes(self, tolerance: float) -> bool:
        return self.worst() <= tolerance


class ArrangementResult(BaseModel):
    """Pairing of p with a permutation of q; permutation[k] is the 1-based q index paired with p[k]."""
    model_config = ConfigDict(frozen=True)

    permutation: Tuple[int, ...]
    value: float

    @field_validator('permutation')
    @classmethod
    def must_be_bijection(cls, v):
        if sorted(v) != list(range(1, len(v) + 1)):
            raise ValueError('permutation must be a bijection on 1..n.')
        return v


class FitReport(BaseModel):
    """Outcome of fitting a parametric marginal family."""
    model_config = ConfigDict(frozen=True)

    family: Literal["power_law", "exponential"]
    method: Literal["least_squares_pmf", "least_squares_survival", "mle"]
    estimate: float
    interval: Optional[Tuple[float, float]] = None
    goodness: float
    goodness_kind: Literal["rmse", "log_likelihood"]
    amplitude: Optional[float] = None
    boundary: bool = False
    n_points: int = Field(..., ge=1)

    @model_validator(mode='after')
    def interval_brackets_estimate(self):
        if self.interval is not None:
            lo, hi = self.interval
            tol = 1e-9 * max(1.0, abs(self.estimate))
            if not (lo - tol <= self.estimate <= hi + tol):
                raise ValueError('interval must contain the estimate.')
        return self


class GridSpec(BaseModel):
    """Uniform grid lo..hi with `steps` points (inclusive)."""
    model_config = ConfigDict(frozen=True)

    lo: float
    hi: float
    steps: int = Field(..., ge=2)

    @model_validator(mode='after')
    def lo_below_hi(self):
        if not self.lo < self.hi:
            raise ValueError('grid requires lo < hi.')
        return self

    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)


class ScanResult(BaseModel):
    """Objective values over a parameter grid, rows ordered by parameter tuple."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    axes: Tuple[str, ...]
    objective: str
    points: np.ndarray
    values: np.ndarray
    alarms: Tuple[str, ...] = ()

    @field_validator('points', mode='before')
    @classmethod
    def points_as_matrix(cls, v):
        return _frozen_array(v, 2)

    @field_validator('values', mode='before')
    @classmethod
    def values_as_vector(cls, v):
        return _frozen_array(v, 1)

    @model_validator(mode='after')
    def shapes_agree(self):
        if self.points.shape != (self.values.size, len(self.axes)):
            raise ValueError('points must have one row per value and one column per axis.')
        return self

    def __len__(self) -> int:
        return int(self.values.size)

    def to_frame(self):
        import pandas as pd
        frame = pd.DataFrame(self.points, columns=list(self.axes))
        frame[self.objective] = self.values
        return frame


class Extremum(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["min", "max"]
    parameter: float
    value: float


class CalibrationResult(BaseModel):
    """Extremizing parameter of a copula objective and how it was located."""
    model_config = ConfigDict(frozen=True)

    family: CopulaFamily
    objective: str
    goal: Literal["min", "max"]
    theta_star: Optional[float] = None
    k_star: Optional[float] = None
    value: float
    coarse_value: float
    location: Location
    window: Tuple[Tuple[float, float], ...] = ()
    local_extrema: Tuple[Extremum, ...] = ()
    trace: ScanResult

    @property
    def alarms(self) -> Tuple[str, ...]:
        return self.trace.alarms


class SliceExtrema(BaseModel):
    """Entropy extremes along theta for one fixed marginal parameter k."""
    model_config = ConfigDict(frozen=True)

    k: float
    theta_at_max: Optional[float] = None
    h_max: float
    theta_at_min: Optional[float] = None
    h_min: float


class SurfaceResult(BaseModel):
    """Entropy over a (k, theta) grid with per-k summaries."""
    model_config = ConfigDict(frozen=True)

    family: CopulaFamily
    trace: ScanResult
    per_k: Tuple[SliceExtrema, ...]
    k_at_max: float
    h_at_max: float
    decreasing_for_k_at_least_one: bool
    local_extrema: Tuple[Extremum, ...] = ()
    optimum: Optional[CalibrationResult] = None


class RunConfig(BaseModel):
    """Validated settings of one CLI invocation."""
    command: Literal["degrees", "fit", "joint", "entropy", "distance", "scan", "calibrate", "report"]
    inputs: Tuple[str, ...] = ()
    output: Optional[str] = None
    output_format: Literal["csv", "json"] = "csv"
    quiet: bool = False
    options: Dict[str, object] = Field(default_factory=dict)

    @field_validator('inputs')
    @classmethod
    def inputs_must_exist(cls, v):
        import os
        for path in v:
            if not os.path.exists(path):
                raise ValueError(f'Input path not found: {path}')
        return v
