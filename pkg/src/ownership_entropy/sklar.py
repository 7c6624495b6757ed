"""Discrete Sklar construction: joint degree laws from two marginals and a copula.

Rows index k_in = 1..n_in, columns index k_out = 1..n_out. Cell (i, j) gets
the C-volume of the rectangle [u(i-1), u(i)] x [v(j-1), v(j)], where u and v
are the marginal CDFs.
"""

from typing import Tuple

import numpy as np

from ownership_entropy.config import CLAMP_TOLERANCE
from ownership_entropy.copulas import copula_grid, rectangle_volumes
from ownership_entropy.logging_config import get_logger
from ownership_entropy.marginals import cdf
from ownership_entropy.models import CopulaSpec, DegreeSample, DiscretePMF, JointPMF

logger = get_logger(__name__)


def joint_from_copula(spec: CopulaSpec, pmf_in: DiscretePMF, pmf_out: DiscretePMF) -> JointPMF:
    """Joint PMF of (k_in, k_out) with the given marginals coupled by `spec`.

    Round-off negatives above -1e-12 are clamped to zero. Anything more
    negative is clamped as well but recorded as a validity alarm on the result.
    """
    volumes = rectangle_volumes(copula_grid(spec, cdf(pmf_in), cdf(pmf_out)))

    alarms = []
    worst = float(volumes.min())
    if worst < -CLAMP_TOLERANCE:
        bad = int((volumes < -CLAMP_TOLERANCE).sum())
        alarms.append(f"{spec.label}: {bad} cell(s) with negative mass (worst {worst:.3e})")
        logger.warning(f"Validity alarm: {alarms[-1]}")

    mass = np.clip(volumes, 0.0, None)
    total = float(mass.sum())
    if abs(total - 1.0) > CLAMP_TOLERANCE:
        mass = mass / total

    return JointPMF(n_in=pmf_in.n, n_out=pmf_out.n, mass=mass, alarms=tuple(alarms))


def empirical_joint(sample: DegreeSample) -> JointPMF:
    """Relative frequency of each observed (k_in, k_out) pair."""
    counts = np.zeros((sample.n_in_max, sample.n_out_max))
    pairs = np.asarray(sample.pairs, dtype=int)
    np.add.at(counts, (pairs[:, 0] - 1, pairs[:, 1] - 1), 1.0)
    return JointPMF(n_in=sample.n_in_max, n_out=sample.n_out_max, mass=counts / len(sample.pairs))


def marginals_of(joint: JointPMF) -> Tuple[DiscretePMF, DiscretePMF]:
    """(k_in PMF, k_out PMF) from row and column sums."""
    rows = joint.mass.sum(axis=1)
    cols = joint.mass.sum(axis=0)
    return (
        DiscretePMF(n=joint.n_in, probs=rows / rows.sum()),
        DiscretePMF(n=joint.n_out, probs=cols / cols.sum()),
    )


def align(a: JointPMF, b: JointPMF) -> Tuple[np.ndarray, np.ndarray]:
    """Both mass matrices zero-padded to the elementwise maximum of their shapes."""
    shape = (max(a.n_in, b.n_in), max(a.n_out, b.n_out))
    padded = []
    for joint in (a, b):
        m = np.zeros(shape)
        m[:joint.n_in, :joint.n_out] = joint.mass
        padded.append(m)
    return padded[0], padded[1]


def diagonal_mass(joint: JointPMF) -> float:
    """Total mass on cells with k_in == k_out."""
    return float(np.trace(joint.mass))
