"""Covariance estimation, forward-backward smoothing and eigen-spacing diagnostics."""
from typing import NamedTuple

import numpy as np

from .errors import DataError, DomainError

FRAME_SNAPSHOTS = 200


def is_hermitian(R, rtol=1e-10):
    R = np.asarray(R)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(R), initial=0.0)))
    return bool(np.max(np.abs(R - R.conj().T), initial=0.0) <= rtol * scale)


def check_hermitian(R, what='input'):
    R = np.asarray(R)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise DomainError(f'{what} must be a square matrix, got shape {R.shape}')
    if not is_hermitian(R):
        raise DomainError(f'{what} must be Hermitian')
    return R


def sample_covariance(X):
    """Mean-removed sample covariance ``(1/Q) (X - xbar)(X - xbar)^H``.

    Args:
        X (~numpy.ndarray): ``M x Q`` snapshot matrix.

    Returns:
        ~numpy.ndarray: Hermitian ``M x M`` matrix.
    """
    X = np.asarray(X)
    if X.ndim != 2:
        raise DataError(f'snapshot matrix must be 2-D, got {X.ndim}-D')
    q = X.shape[1]
    if q < 2:
        raise DataError(f'at least two snapshots are required, got {q}')
    xc = X - X.mean(axis=1, keepdims=True)
    r = (xc @ xc.conj().T) / q
    return 0.5 * (r + r.conj().T)


def fb_smooth(R):
    """Forward-backward average ``(R + J conj(R) J) / 2``.

    The result is persymmetric; Hermitian Toeplitz inputs are fixed points.
    """
    R = check_hermitian(R)
    return 0.5 * (R + np.conj(R[::-1, ::-1]))


def exchange_matrix(m):
    return np.eye(m)[::-1]


def sorted_eigenvalues(R):
    """Real eigenvalues of a Hermitian matrix in descending order (stable tie order)."""
    R = check_hermitian(R)
    w = np.linalg.eigvalsh(R)
    return w[np.argsort(-w, kind='stable')]


def sorted_singular_values(C):
    return np.linalg.svd(np.asarray(C), compute_uv=False)


class SpacingRatio(NamedTuple):
    value: float
    degenerate: bool


def eigen_spacing_ratio(values, floor=1e-12):
    """Ratio ``(s1 - s2) / (s2 - s3)`` over the three largest values.

    ``values`` is either a descending spectrum or a square matrix, in which case
    its Hermitian eigenvalues are used. A denominator below ``floor`` yields
    ``+inf`` with ``degenerate=True``.
    """
    v = np.asarray(values)
    if v.ndim == 2:
        v = sorted_eigenvalues(v)
    v = np.sort(np.asarray(v, dtype=float))[::-1]
    if v.size < 3:
        raise DataError('the spacing ratio needs at least three eigenvalues')
    den = v[1] - v[2]
    if den < floor:
        return SpacingRatio(float('inf'), True)
    return SpacingRatio(float((v[0] - v[1]) / den), False)


def frame_averaged_spacing_ratio(spectra, floor=1e-12):
    """Averages each ordered value across frames, then forms the spacing ratio.

    Args:
        spectra: ``F x M`` array, one descending spectrum per frame.
    """
    spectra = np.asarray(spectra, dtype=float)
    if spectra.ndim != 2 or spectra.shape[0] < 1:
        raise DataError('expected a non-empty (frames, values) array')
    ordered = -np.sort(-spectra, axis=1)
    return eigen_spacing_ratio(ordered.mean(axis=0), floor=floor)
