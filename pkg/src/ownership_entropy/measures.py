"""Scalar functionals on degree laws: Shannon entropy (nats), Euclidean distance,
mutual information, and the rearrangement bound on scalar products."""

from itertools import permutations
from typing import Sequence

import numpy as np
from scipy.special import entr

from ownership_entropy.copulas import copula_grid
from ownership_entropy.errors import ShapeMismatchError, SupportRangeError
from ownership_entropy.marginals import cdf
from ownership_entropy.models import (
    ArrangementResult,
    CopulaSpec,
    DiscretePMF,
    JointPMF,
)
from ownership_entropy.sklar import align, marginals_of

GOALS = ('min', 'max')


def shannon_entropy(joint: JointPMF) -> float:
    """-sum m ln m over the joint masses, with 0 ln 0 = 0."""
    return float(entr(np.clip(joint.mass, 0.0, None)).sum())


def marginal_entropy(pmf: DiscretePMF) -> float:
    return float(entr(pmf.probs).sum())


def mutual_information(joint: JointPMF) -> float:
    """H(k_in) + H(k_out) - H(k_in, k_out), floored at zero."""
    pmf_in, pmf_out = marginals_of(joint)
    mi = marginal_entropy(pmf_in) + marginal_entropy(pmf_out) - shannon_entropy(joint)
    return max(mi, 0.0)


def copula_value_entropy(spec: CopulaSpec, pmf_in: DiscretePMF, pmf_out: DiscretePMF) -> float:
    """-sum C ln C over copula values at the marginal CDF grid points.

    A diagnostic only: C values are cumulative, not masses, so this is not
    the entropy of any distribution.
    """
    values = copula_grid(spec, cdf(pmf_in)[1:], cdf(pmf_out)[1:])
    return float(entr(values).sum())


def euclidean_distance(a: JointPMF, b: JointPMF) -> float:
    """Frobenius distance between two joints on their zero-padded common grid."""
    left, right = align(a, b)
    return float(np.linalg.norm(left - right))


def _check_pair(p: Sequence[float], q: Sequence[float], goal: str):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if goal not in GOALS:
        raise ValueError(f"goal must be 'min' or 'max', got '{goal}'.")
    if p.ndim != 1 or q.ndim != 1 or p.size != q.size:
        raise ShapeMismatchError(f"Vectors must have equal length, got {p.size} and {q.size}.")
    if p.size == 0:
        raise ShapeMismatchError("Vectors must be nonempty.")
    if np.any(p < 0) or np.any(q < 0):
        raise SupportRangeError("Vector entries must be nonnegative.")
    return p, q


def extremal_arrangement(p: Sequence[float], q: Sequence[float], goal: str = 'min') -> ArrangementResult:
    """Permutation of q that extremizes sum_k p[k] * q[perm[k]].

    max pairs both vectors in ascending order; min pairs p ascending with q
    descending. Ties keep their original index order.
    """
    p, q = _check_pair(p, q, goal)
    order_p = np.argsort(p, kind='stable')
    order_q = np.argsort(q if goal == 'max' else -q, kind='stable')

    perm = np.empty(p.size, dtype=int)
    perm[order_p] = order_q
    return ArrangementResult(
        permutation=tuple(int(i) + 1 for i in perm),
        value=float(np.dot(p, q[perm])),
    )


def brute_force_arrangement(p: Sequence[float], q: Sequence[float], goal: str = 'min') -> ArrangementResult:
    """Exhaustive search over all n! pairings; the first optimum found wins."""
    p, q = _check_pair(p, q, goal)
    sign = 1.0 if goal == 'min' else -1.0
    best_perm, best_value = None, None
    for perm in permutations(range(p.size)):
        value = float(np.dot(p, q[list(perm)]))
        if best_value is None or sign * value < sign * best_value:
            best_perm, best_value = perm, value
    return ArrangementResult(permutation=tuple(i + 1 for i in best_perm), value=best_value)
