"""Low-rank Toeplitz plus non-negative diagonal decomposition by ADMM.

Solves

    minimize   ||(L + D) - R||_F^2 + eta * ||L||_*
    subject to L Hermitian Toeplitz, D diagonal with D >= 0

with the splitting ``L = Z`` and ``D = W``. The Z-step is singular value
thresholding capped at ``k_max`` retained values; the W-step projects onto
non-negative diagonals. The source count is the numerical rank of the final
Toeplitz iterate.
"""
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .covariance import check_hermitian
from .errors import ConfigError, DomainError, NumericalError

RANK_ABS_FLOOR = 1e-10


@dataclass(frozen=True)
class SolverParams:
    """Tuning knobs for :func:`decompose`.

    ``k_max=None`` resolves to ``M - 1`` for an ``M``-element covariance, the
    largest count a ULA can resolve. ``eta`` has no default on purpose.
    """

    eta: float
    mu: float = 1.0
    eps: float = 1e-6
    max_iters: int = 2000
    k_max: int = None
    rank_rel_tol: float = 0.05

    def __post_init__(self):
        if not self.eta >= 0:
            raise ConfigError(f'eta must be non-negative, got {self.eta!r}')
        if not self.mu > 0:
            raise ConfigError(f'mu must be positive, got {self.mu!r}')
        if not self.eps > 0:
            raise ConfigError(f'eps must be positive, got {self.eps!r}')
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ConfigError(f'max_iters must be a positive integer, got {self.max_iters!r}')
        if self.k_max is not None and (int(self.k_max) != self.k_max or self.k_max < 1):
            raise ConfigError(f'k_max must be a positive integer, got {self.k_max!r}')
        if not 0 < self.rank_rel_tol < 1:
            raise ConfigError(f'rank_rel_tol must lie in (0, 1), got {self.rank_rel_tol!r}')

    def resolved_k_max(self, m):
        k = m - 1 if self.k_max is None else int(self.k_max)
        if k > m:
            raise ConfigError(f'k_max={k} exceeds the matrix size {m}')
        return k

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass
class DecompResult:
    L_hat: np.ndarray
    D_hat: np.ndarray
    est_num_sources: int
    iterations: int
    converged: bool
    fit_error: float
    residual_LZ: np.ndarray = field(repr=False)
    residual_DW: np.ndarray = field(repr=False)
    objective: np.ndarray = field(repr=False)
    Z: np.ndarray = field(repr=False, default=None)
    W: np.ndarray = field(repr=False, default=None)

    @property
    def singular_values(self):
        return np.linalg.svd(self.L_hat, compute_uv=False)

    @property
    def primal_residuals(self):
        """``(iterations, 2)`` array of ``||L - Z||_F`` and ``||D - W||_F``."""
        return np.column_stack([self.residual_LZ, self.residual_DW])


@lru_cache(maxsize=32)
def _diagonal_index(m):
    i, j = np.indices((m, m))
    idx = (j - i + m - 1).ravel()
    counts = np.bincount(idx, minlength=2 * m - 1).astype(float)
    return idx, counts


def project_toeplitz(X):
    """Replaces every diagonal of a square matrix by its mean.

    This is the Frobenius-orthogonal projection onto Toeplitz matrices.
    """
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DomainError(f'expected a square matrix, got shape {X.shape}')
    m = X.shape[0]
    idx, counts = _diagonal_index(m)
    flat = X.ravel()
    if np.iscomplexobj(X):
        means = (np.bincount(idx, flat.real, 2 * m - 1)
                 + 1j * np.bincount(idx, flat.imag, 2 * m - 1)) / counts
    else:
        means = np.bincount(idx, flat, 2 * m - 1) / counts
    return means[idx].reshape(m, m)


def project_nonneg_diag(X):
    """Real diagonal matrix holding ``max(Re X_ii, 0)``."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DomainError(f'expected a square matrix, got shape {X.shape}')
    return np.diag(np.maximum(np.real(np.diag(X)), 0.0))


def truncate_top_k(S, k):
    """Keeps the ``k`` largest diagonal entries in place and zeroes the rest.

    Accepts a diagonal matrix or the vector of its diagonal and returns the same
    form. Ties go to the lowest index.
    """
    S = np.asarray(S)
    vec = np.diag(S) if S.ndim == 2 else S
    if k > vec.size or k < 0:
        raise DomainError(f'cannot keep {k} of {vec.size} entries')
    keep = np.argsort(-vec, kind='stable')[:k]
    out = np.zeros_like(vec)
    out[keep] = vec[keep]
    return np.diag(out) if S.ndim == 2 else out


def svt_step(X, tau, k, iteration=None):
    """Soft-thresholds the singular values of ``X`` by ``tau`` and keeps the top ``k``."""
    if tau < 0:
        raise DomainError(f'threshold must be non-negative, got {tau}')
    try:
        u, s, vh = np.linalg.svd(X)
    except np.linalg.LinAlgError as exc:
        where = '' if iteration is None else f' at iteration {iteration}'
        raise NumericalError(f'SVD failed{where}: {exc}') from exc
    s = truncate_top_k(np.maximum(s - tau, 0.0), k)
    return (u * s) @ vh


def estimate_rank(L_hat, params=None, rel_tol=None, floor=RANK_ABS_FLOOR):
    """Counts singular values above ``rel_tol * s_max`` and above ``floor``.

    :func:`decompose` raises ``floor`` to the accuracy its stopping rule
    guarantees, so leftovers of a vanishing ``L`` are not counted as sources.
    """
    if rel_tol is None:
        rel_tol = params.rank_rel_tol if params is not None else SolverParams(eta=0).rank_rel_tol
    floor = max(float(floor), RANK_ABS_FLOOR)
    s = np.linalg.svd(np.asarray(L_hat), compute_uv=False)
    if s.size == 0 or s[0] <= floor:
        return 0
    return int(np.count_nonzero((s > rel_tol * s[0]) & (s > floor)))


def rank_floor(R, params):
    """Singular values of ``L`` below this are indistinguishable from ADMM residue."""
    return max(RANK_ABS_FLOOR, 10 * params.eps * max(1.0, float(np.linalg.norm(R))))


def objective(L, D, R, eta):
    """``||(L + D) - R||_F^2 + eta * ||L||_*``."""
    fit = np.linalg.norm(L + D - R) ** 2
    return float(fit + eta * np.linalg.svd(L, compute_uv=False).sum())


def decompose(R, params):
    """Splits a Hermitian covariance into Toeplitz ``L`` plus non-negative diagonal ``D``.

    Args:
        R (~numpy.ndarray): Hermitian ``M x M`` matrix, normally FB-smoothed.
        params (SolverParams): Regularization and stopping settings.

    Returns:
        DecompResult: ``converged`` is False when ``max_iters`` ran out first.
    """
    R = check_hermitian(np.asarray(R, dtype=complex), 'covariance')
    m = R.shape[0]
    if m < 2:
        raise DomainError('covariance must be at least 2x2')
    k_max = params.resolved_k_max(m)
    mu, eta = float(params.mu), float(params.eta)
    tau = eta / mu

    L = project_toeplitz(R)
    L = 0.5 * (L + L.conj().T)
    D = project_nonneg_diag(R - L)
    Z = L.copy()
    W = D.copy()
    Y1 = np.zeros_like(R)
    Y2 = np.zeros((m, m))

    res_lz, res_dw, obj = [], [], []
    converged = False
    t = 0
    while t < params.max_iters:
        t += 1
        L_prev = L
        L = project_toeplitz((2 * (R - D) - Y1 + mu * Z) / (2 + mu))
        L = 0.5 * (L + L.conj().T)
        D = project_nonneg_diag((2 * (R - L) - Y2 + mu * W) / (2 + mu))
        Z = svt_step(L + Y1 / mu, tau, k_max, iteration=t)
        W = project_nonneg_diag(D + Y2 / mu)
        Y1 = Y1 + mu * (L - Z)
        Y2 = Y2 + mu * (D - W)

        res_lz.append(np.linalg.norm(L - Z))
        res_dw.append(np.linalg.norm(D - W))
        obj.append(np.linalg.norm(L + D - R) ** 2 + eta * np.linalg.svd(Z, compute_uv=False).sum())
        if not np.all(np.isfinite(L)):
            raise NumericalError(f'non-finite iterate at iteration {t}')
        # The L-change test alone fires on the first sweep when R is already
        # Toeplitz, so the split constraints must also be met.
        if (np.linalg.norm(L - L_prev) <= params.eps * max(1.0, np.linalg.norm(L_prev))
                and res_lz[-1] <= params.eps and res_dw[-1] <= params.eps):
            converged = True
            break

    return DecompResult(
        L_hat=L,
        D_hat=D,
        est_num_sources=min(estimate_rank(L, params, floor=rank_floor(R, params)), k_max),
        iterations=t,
        converged=converged,
        fit_error=float(np.linalg.norm(L + D - R)),
        residual_LZ=np.asarray(res_lz),
        residual_DW=np.asarray(res_dw),
        objective=np.asarray(obj),
        Z=Z,
        W=W,
    )
