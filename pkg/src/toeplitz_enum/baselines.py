"""Classical eigenvalue-based source counters used as reference methods."""
import enum

import numpy as np

from .covariance import check_hermitian
from .errors import DataError

EIGEN_GAP_GUARD = 1.5
_LOG_CLAMP = 1e-12


class BaselineKind(enum.Enum):
    MDL = 'mdl'
    AIC = 'aic'
    EIGEN_GAP = 'eigengap'


def _ld_statistic(desc, k, num_snapshots):
    """Log-likelihood term over the ``M - k`` smallest eigenvalues."""
    tail = np.clip(desc[k:], _LOG_CLAMP, None)
    n = tail.size
    log_geo = np.mean(np.log(tail))
    log_arith = np.log(np.mean(tail))
    return num_snapshots * n * (log_arith - log_geo)


def information_criterion(eigenvalues, num_snapshots, kind=BaselineKind.MDL):
    """Wax-Kailath MDL/AIC scores for ``k = 0, ..., M-1``; the estimate is the argmin."""
    desc = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]
    m = desc.size
    scores = np.empty(m)
    for k in range(m):
        free = k * (2 * m - k)
        if kind is BaselineKind.MDL:
            penalty = 0.5 * free * np.log(num_snapshots)
        elif kind is BaselineKind.AIC:
            penalty = free
        else:
            raise ValueError(f'{kind} is not an information criterion')
        scores[k] = _ld_statistic(desc, k, num_snapshots) + penalty
    return scores


def eigen_gap(eigenvalues, guard=EIGEN_GAP_GUARD):
    """Position of the largest consecutive ratio ``s_i / s_{i+1}``; 0 if none exceeds ``guard``."""
    desc = np.clip(np.sort(np.asarray(eigenvalues, dtype=float))[::-1], _LOG_CLAMP, None)
    ratios = desc[:-1] / desc[1:]
    best = int(np.argmax(ratios))
    return best + 1 if ratios[best] > guard else 0


def enumerate_baseline(R, num_snapshots, kind):
    """Estimates the source count from the eigenvalues of ``R``.

    Args:
        R (~numpy.ndarray): Hermitian covariance.
        num_snapshots (int): Snapshot count behind ``R``; needs ``Q >= M`` for MDL/AIC.
        kind (BaselineKind): Criterion to apply.

    Returns:
        int: Estimate in ``[0, M-1]``.
    """
    kind = BaselineKind(kind)
    R = check_hermitian(R, 'covariance')
    m = R.shape[0]
    if m < 2:
        raise DataError('at least two sensors are required')
    eig = np.linalg.eigvalsh(R)
    if kind is BaselineKind.EIGEN_GAP:
        return min(eigen_gap(eig), m - 1)
    if num_snapshots < m:
        raise DataError(f'{kind.name} needs at least M={m} snapshots, got {num_snapshots}')
    return int(np.argmin(information_criterion(eig, num_snapshots, kind)))
