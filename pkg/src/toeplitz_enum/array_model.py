"""Uniform linear array geometry and snapshot synthesis.

Sources are narrowband, far-field and may be partially or fully coherent.
Angles are given in degrees measured from boresight.
"""
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DomainError

_PSD_TOL = 1e-10


@dataclass(frozen=True)
class ArrayConfig:
    """ULA geometry.

    Args:
        num_elements (int): Number of sensors ``M``.
        spacing (float): Inter-element spacing in meters.
        wavelength (float): Carrier wavelength in meters.
    """

    num_elements: int = 3
    spacing: float = 0.02
    wavelength: float = 0.04

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 2:
            raise ConfigError(f'num_elements must be an integer >= 2, got {self.num_elements!r}')
        if not self.spacing > 0 or not self.wavelength > 0:
            raise ConfigError('spacing and wavelength must be positive')

    @property
    def size(self):
        return int(self.num_elements)


def uniform_correlation(num_sources, rho):
    """K x K correlation matrix with unit diagonal and every off-diagonal equal to ``rho``."""
    c = np.full((num_sources, num_sources), rho, dtype=complex)
    np.fill_diagonal(c, 1.0)
    return c


def symmetric_angles(num_sources, separation_deg):
    """Places ``num_sources`` angles ``separation_deg`` apart, centered on boresight.

    Two sources land at ``-separation/2`` and ``+separation/2``.
    """
    offsets = np.arange(num_sources) - (num_sources - 1) / 2
    return tuple(float(x) for x in offsets * separation_deg)


@dataclass(frozen=True, eq=False)
class Scenario:
    """Ground truth for one synthetic experiment.

    ``snr_db`` is the per-source power over the mean noise variance. The noise
    variances therefore fix the absolute scale and the source power follows
    from them. ``noise_variances=None`` means unit white noise on every sensor.
    """

    angles_deg: tuple = ()
    correlation: np.ndarray = None
    snr_db: float = 10.0
    num_snapshots: int = 200
    noise_variances: tuple = None
    seed: int = 0

    def __post_init__(self):
        angles = tuple(float(a) for a in np.atleast_1d(np.asarray(self.angles_deg, dtype=float)))
        object.__setattr__(self, 'angles_deg', angles)
        k = len(angles)
        if self.correlation is None:
            corr = np.eye(k, dtype=complex)
        else:
            corr = np.atleast_2d(np.asarray(self.correlation, dtype=complex))
        object.__setattr__(self, 'correlation', corr)
        if self.noise_variances is not None:
            nv = tuple(float(v) for v in self.noise_variances)
            if any(not v > 0 for v in nv):
                raise ConfigError('noise variances must be positive')
            object.__setattr__(self, 'noise_variances', nv)
        if int(self.num_snapshots) != self.num_snapshots or self.num_snapshots < 1:
            raise ConfigError(f'num_snapshots must be a positive integer, got {self.num_snapshots!r}')
        if self.seed < 0:
            raise ConfigError('seed must be non-negative')
        if len(set(angles)) != k:
            raise DomainError(f'source angles must be distinct, got {angles}')
        if corr.shape != (k, k):
            raise ConfigError(f'correlation must be {k}x{k}, got {corr.shape}')
        if k:
            if not np.allclose(corr, corr.conj().T, atol=1e-12):
                raise DomainError('correlation matrix must be Hermitian')
            if not np.allclose(np.diag(corr), 1.0, atol=1e-12):
                raise DomainError('correlation matrix must have unit diagonal')
            if np.linalg.eigvalsh(corr).min() < -_PSD_TOL:
                raise DomainError('correlation matrix is not positive semidefinite')

    @property
    def num_sources(self):
        return len(self.angles_deg)

    @classmethod
    def symmetric(cls, num_sources, separation_deg, rho=0.0, **kwargs):
        """Equal-spaced sources about boresight with uniform pairwise correlation ``rho``."""
        return cls(angles_deg=symmetric_angles(num_sources, separation_deg),
                   correlation=uniform_correlation(num_sources, rho), **kwargs)

    def replace(self, **changes):
        return replace(self, **changes)

    def noise_profile(self, num_elements):
        """Per-sensor noise variances as an array of length ``num_elements``."""
        if self.noise_variances is None:
            return np.ones(num_elements)
        nv = np.asarray(self.noise_variances)
        if nv.size != num_elements:
            raise ConfigError(f'{nv.size} noise variances given for a {num_elements}-element array')
        return nv

    def source_power(self, num_elements):
        return float(np.mean(self.noise_profile(num_elements)) * 10.0 ** (self.snr_db / 10.0))


def steering_vector(cfg, angle_deg):
    """ULA response to a plane wave from ``angle_deg``; element 0 is the phase reference."""
    if not -90.0 < angle_deg < 90.0:
        raise DomainError(f'angle must lie in (-90, 90) degrees, got {angle_deg}')
    phase = 2 * np.pi / cfg.wavelength * cfg.spacing * np.sin(np.deg2rad(angle_deg))
    return np.exp(1j * phase * np.arange(cfg.size))


def steering_matrix(cfg, angles_deg):
    """Stacks steering vectors column-wise into an ``M x K`` matrix."""
    angles = [float(a) for a in angles_deg]
    if len(set(angles)) != len(angles):
        raise DomainError(f'duplicate source angles: {angles}')
    if not angles:
        return np.zeros((cfg.size, 0), dtype=complex)
    return np.column_stack([steering_vector(cfg, a) for a in angles])


def correlation_sqrt(corr):
    """Eigen square root ``F`` with ``F @ F^H == corr``; rank-deficient when sources are coherent."""
    w, v = np.linalg.eigh(corr)
    if w.size and w.min() < -_PSD_TOL * max(1.0, w.max()):
        raise DomainError('correlation matrix is not positive semidefinite')
    return v * np.sqrt(np.clip(w, 0.0, None))


def _complex_normal(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def synthesize(cfg, sc, rng=None):
    """Draws the ``M x Q`` snapshot matrix ``X = A S + W``.

    Args:
        cfg (ArrayConfig): Array geometry.
        sc (Scenario): Sources, SNR, snapshot count and noise profile.
        rng: Optional ``numpy.random.Generator`` or seed material. When omitted
            the scenario seed is used, so repeated calls are bit-identical.

    Returns:
        ~numpy.ndarray: Complex array of shape ``(M, Q)``.
    """
    if rng is None or not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(sc.seed if rng is None else rng)
    m, q, k = cfg.size, int(sc.num_snapshots), sc.num_sources
    noise_var = sc.noise_profile(m)
    x = np.zeros((m, q), dtype=complex)
    if k:
        a = steering_matrix(cfg, sc.angles_deg)
        s = np.sqrt(sc.source_power(m)) * (correlation_sqrt(sc.correlation) @ _complex_normal(rng, (k, q)))
        x += a @ s
    x += np.sqrt(noise_var)[:, None] * _complex_normal(rng, (m, q))
    return x


def population_covariance(cfg, sc):
    """Exact ``A R_S A^H + R_W`` for a scenario (the infinite-snapshot limit)."""
    m = cfg.size
    r = np.diag(sc.noise_profile(m)).astype(complex)
    if sc.num_sources:
        a = steering_matrix(cfg, sc.angles_deg)
        r += sc.source_power(m) * (a @ sc.correlation @ a.conj().T)
    return r
