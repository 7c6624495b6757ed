"""CSV and JSON codecs for marginals, joints, scans, fits and calibrations.

Every float is written with 12 significant digits so repeated runs produce
byte-identical files. JSON documents carry a top-level `format_version`.
"""

import io
import json
import math
from typing import Any, Dict, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from ownership_entropy.config import FLOAT_DIGITS, FORMAT_VERSION
from ownership_entropy.errors import EmptyInputError, SupportRangeError
from ownership_entropy.logging_config import get_logger
from ownership_entropy.marginals import pmf_from_counts
from ownership_entropy.models import (
    CalibrationResult,
    DegreeRecord,
    DiscretePMF,
    FitReport,
    JointPMF,
    ScanResult,
    SurfaceResult,
)
from ownership_entropy.net import degree_table

logger = get_logger(__name__)

FLOAT_FORMAT = f'%.{FLOAT_DIGITS}g'


def round_float(x: float) -> Optional[float]:
    """Round to FLOAT_DIGITS significant digits; non-finite values become None."""
    x = float(x)
    if not math.isfinite(x):
        return None
    rounded = float(FLOAT_FORMAT % x)
    return 0.0 if rounded == 0 else rounded


def to_jsonable(obj: Any) -> Any:
    """Convert models, arrays and tuples into plain JSON types with rounded floats."""
    if isinstance(obj, BaseModel):
        return to_jsonable({name: getattr(obj, name) for name in type(obj).model_fields})
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_float(obj)
    return obj


def dumps_json(payload: Dict[str, Any]) -> str:
    document = {'format_version': FORMAT_VERSION}
    document.update(payload)
    return json.dumps(to_jsonable(document), indent=2) + '\n'


def _to_csv(frame: pd.DataFrame) -> str:
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return buffer.getvalue()


def write_text(text: str, path: Optional[str]) -> None:
    """Write to `path`, or to stdout when path is None."""
    if path is None:
        print(text, end='')
        return
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(text)
    logger.info(f"Wrote {path}")


# ============================================================================
# CSV
# ============================================================================

def pmf_csv(pmf: DiscretePMF) -> str:
    return _to_csv(pd.DataFrame({'j': np.arange(1, pmf.n + 1), 'prob': pmf.probs}))


def joint_csv(joint: JointPMF) -> str:
    i, j = np.meshgrid(np.arange(1, joint.n_in + 1), np.arange(1, joint.n_out + 1), indexing='ij')
    return _to_csv(pd.DataFrame({'i': i.ravel(), 'j': j.ravel(), 'mass': joint.mass.ravel()}))


def scan_csv(scan: ScanResult) -> str:
    return _to_csv(scan.to_frame())


def degrees_csv(records: Sequence[DegreeRecord]) -> str:
    return _to_csv(degree_table(records))


def scalars_csv(values: Dict[str, float]) -> str:
    return _to_csv(pd.DataFrame({'measure': list(values), 'value': list(values.values())}))


# ============================================================================
# JSON payloads
# ============================================================================

def pmf_payload(pmf: DiscretePMF) -> Dict[str, Any]:
    return {'n': pmf.n, 'probs': pmf.probs, 'spec': pmf.spec.label if pmf.spec else None}


def joint_payload(joint: JointPMF) -> Dict[str, Any]:
    return {'n_in': joint.n_in, 'n_out': joint.n_out, 'mass': joint.mass, 'alarms': joint.alarms}


def fit_payload(report: FitReport) -> Dict[str, Any]:
    return to_jsonable(report)


def calibration_payload(result: CalibrationResult, include_trace: bool = False) -> Dict[str, Any]:
    """`objective` carries the optimized value; `measure` names what was optimized."""
    payload = {
        'family': result.family,
        'measure': result.objective,
        'goal': result.goal,
        'theta_star': result.theta_star,
        'k_star': result.k_star,
        'objective': result.value,
        'coarse_value': result.coarse_value,
        'location': result.location,
        'window': result.window,
        'local_extrema': result.local_extrema,
        'alarms': result.alarms,
    }
    if include_trace:
        payload['trace'] = {'theta': result.trace.points[:, 0], 'value': result.trace.values}
    return payload


def surface_payload(result: SurfaceResult) -> Dict[str, Any]:
    return {
        'family': result.family,
        'k_at_max': result.k_at_max,
        'h_at_max': result.h_at_max,
        'decreasing_for_k_at_least_one': result.decreasing_for_k_at_least_one,
        'local_extrema': result.local_extrema,
        'per_k': result.per_k,
        'optimum': calibration_payload(result.optimum) if result.optimum else None,
        'alarms': result.trace.alarms,
    }


# ============================================================================
# READERS
# ============================================================================

def read_pmf_csv(path: str) -> DiscretePMF:
    """Histogram CSV `j,prob` (or `j,count`) into a PMF on 1..max(j); missing j get 0."""
    frame = pd.read_csv(path, comment='#')
    column = 'prob' if 'prob' in frame.columns else 'count'
    if 'j' not in frame.columns or column not in frame.columns:
        raise SupportRangeError(f"{path}: expected columns j,prob or j,count.")
    if frame.empty:
        raise EmptyInputError(f"{path}: histogram is empty.")
    j = pd.to_numeric(frame['j'], errors='coerce')
    if j.isna().any() or (j < 1).any() or (j % 1 != 0).any():
        raise SupportRangeError(f"{path}: support values must be integers >= 1.")
    counts = np.zeros(int(j.max()))
    np.add.at(counts, j.astype(int).to_numpy() - 1, frame[column].astype(float).to_numpy())
    return pmf_from_counts(counts)


def read_sample_csv(path: str) -> np.ndarray:
    """One positive integer per line; an optional header line is skipped."""
    frame = pd.read_csv(path, header=None, comment='#', usecols=[0])
    values = pd.to_numeric(frame[0], errors='coerce')
    if len(values) and pd.isna(values.iloc[0]):
        values = values.iloc[1:]
    if values.empty:
        raise EmptyInputError(f"{path}: sample is empty.")
    if values.isna().any() or (values % 1 != 0).any():
        raise SupportRangeError(f"{path}: sample values must be integers.")
    return values.astype(int).to_numpy()


def read_joint_csv(path: str) -> JointPMF:
    """Joint CSV `i,j,mass` into a JointPMF on 1..max(i) x 1..max(j)."""
    frame = pd.read_csv(path, comment='#')
    if not {'i', 'j', 'mass'} <= set(frame.columns):
        raise SupportRangeError(f"{path}: expected columns i,j,mass.")
    if frame.empty:
        raise EmptyInputError(f"{path}: joint is empty.")
    i = frame['i'].astype(int).to_numpy()
    j = frame['j'].astype(int).to_numpy()
    if i.min() < 1 or j.min() < 1:
        raise SupportRangeError(f"{path}: cell indices must be >= 1.")
    mass = np.zeros((i.max(), j.max()))
    np.add.at(mass, (i - 1, j - 1), frame['mass'].astype(float).to_numpy())
    try:
        return JointPMF(n_in=mass.shape[0], n_out=mass.shape[1], mass=mass / mass.sum())
    except ValidationError as e:
        raise SupportRangeError(f"{path}: {e.errors()[0]['msg']}") from None
