"""Monte Carlo harness: probability of correct detection over parameter sweeps.

Every trial draws its data from a counter-based seed derived from
``(sweep seed, axis value, trial index)``. All methods in a sweep see the same
realization, and the aggregated result does not depend on how many worker
threads ran the trials.
"""
import csv
import enum
import io
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .array_model import ArrayConfig, symmetric_angles, synthesize, uniform_correlation
from .baselines import BaselineKind, enumerate_baseline
from .covariance import (FRAME_SNAPSHOTS, fb_smooth, frame_averaged_spacing_ratio,
                         sample_covariance, sorted_singular_values)
from .errors import ConfigError, EnumerationError
from .solver import SolverParams, decompose

FAILED = -1
TOEPLITZ_TOL = 1e-10


class SweepAxis(enum.Enum):
    SNR = 'snr'
    M = 'm'
    DELTA_THETA = 'delta_theta'
    Q = 'q'
    ETA = 'eta'
    RHO = 'rho'


@dataclass
class TrialOutcome:
    estimate: int
    iterations: int = 0
    fit_error: float = float('nan')
    converged: bool = True
    structure_ok: bool = True

    @property
    def failed(self):
        return self.estimate == FAILED


def structure_violations(result, eps):
    """Lists the structural guarantees a :class:`DecompResult` breaks (empty if none)."""
    L, D = result.L_hat, result.D_hat
    m = L.shape[0]
    scale = max(np.linalg.norm(L), 1e-300)
    problems = []
    spread = max(np.ptp(np.diagonal(L, k).real) + np.ptp(np.diagonal(L, k).imag)
                 for k in range(-m + 1, m))
    if spread > TOEPLITZ_TOL * scale:
        problems.append(f'L not Toeplitz (spread {spread:.3g})')
    if np.max(np.abs(L - L.conj().T)) > TOEPLITZ_TOL * scale:
        problems.append('L not Hermitian')
    if np.any(D[~np.eye(m, dtype=bool)] != 0) or np.any(np.diag(D) < 0) or np.iscomplexobj(D):
        problems.append('D not a non-negative real diagonal')
    if result.converged and (result.residual_LZ[-1] >= 10 * eps or result.residual_DW[-1] >= 10 * eps):
        problems.append('primal residual above 10*eps at convergence')
    return problems


@dataclass(frozen=True)
class TargetMethod:
    """The Toeplitz-plus-diagonal decomposition followed by a rank read-out."""

    params: SolverParams
    label: str = 'target'

    def apply(self, R, num_snapshots):
        res = decompose(R, self.params)
        ok = not structure_violations(res, self.params.eps)
        return TrialOutcome(res.est_num_sources, res.iterations, res.fit_error, res.converged, ok)


@dataclass(frozen=True)
class BaselineMethod:
    kind: BaselineKind

    @property
    def label(self):
        return self.kind.value

    def apply(self, R, num_snapshots):
        return TrialOutcome(enumerate_baseline(R, num_snapshots, self.kind))


def smoothed_covariance(array, sc, rng):
    """Synthesizes one realization and returns its FB-smoothed sample covariance."""
    return fb_smooth(sample_covariance(synthesize(array, sc, rng)))


def _run_methods(array, sc, methods, seed_seq):
    rng = np.random.default_rng(seed_seq)
    R = smoothed_covariance(array, sc, rng)
    outcomes = []
    for method in methods:
        try:
            outcomes.append(method.apply(R, sc.num_snapshots))
        except (EnumerationError, np.linalg.LinAlgError, FloatingPointError):
            outcomes.append(TrialOutcome(FAILED, converged=False, structure_ok=False))
    return outcomes


def run_trial(array, sc, method, trial_seed):
    """Source-count estimate of one method on one realization; ``-1`` marks a failed trial."""
    seed = trial_seed if isinstance(trial_seed, np.random.SeedSequence) else np.random.SeedSequence(trial_seed)
    return _run_methods(array, sc, [method], seed)[0].estimate


def _value_key(value):
    return int.from_bytes(struct.pack('<d', float(value)), 'little')


def trial_seed(seed, value, index):
    """Seed material for trial ``index`` at axis ``value``; a pure function of its inputs."""
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(_value_key(value), int(index)))


@dataclass(frozen=True, eq=False)
class SweepSpec:
    array: ArrayConfig
    base_scenario: object
    axis: SweepAxis
    values: tuple
    methods: tuple
    trials: int = 200
    seed: int = 0
    keep_trials: bool = False
    label: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'axis', SweepAxis(self.axis))
        object.__setattr__(self, 'values', tuple(float(v) for v in self.values))
        object.__setattr__(self, 'methods', tuple(self.methods))
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f'trials must be a positive integer, got {self.trials!r}')
        if not self.values:
            raise ConfigError('sweep values must be non-empty')
        if list(self.values) != sorted(self.values):
            raise ConfigError('sweep values must be sorted ascending')
        if not self.methods:
            raise ConfigError('at least one method is required')
        labels = [m.label for m in self.methods]
        if len(set(labels)) != len(labels):
            raise ConfigError(f'method labels must be unique, got {labels}')
        if self.axis is SweepAxis.ETA and not any(isinstance(m, TargetMethod) for m in self.methods):
            raise ConfigError('an eta sweep needs a target method')

    @property
    def true_num_sources(self):
        return self.base_scenario.num_sources

    def replace(self, **changes):
        return replace(self, **changes)

    def at(self, value):
        """``(array, scenario, methods)`` with the sweep axis set to ``value``."""
        array, sc, methods = self.array, self.base_scenario, self.methods
        k = sc.num_sources
        if self.axis is SweepAxis.SNR:
            sc = sc.replace(snr_db=value)
        elif self.axis is SweepAxis.Q:
            sc = sc.replace(num_snapshots=int(value))
        elif self.axis is SweepAxis.DELTA_THETA:
            sc = sc.replace(angles_deg=symmetric_angles(k, value))
        elif self.axis is SweepAxis.RHO:
            sc = sc.replace(correlation=uniform_correlation(k, value))
        elif self.axis is SweepAxis.M:
            array = replace(array, num_elements=int(value))
            nv = sc.noise_variances
            if nv is not None and len(nv) != array.size:
                if len(set(nv)) != 1:
                    raise ConfigError('a non-uniform noise profile cannot follow an M sweep')
                sc = sc.replace(noise_variances=(nv[0],) * array.size)
        elif self.axis is SweepAxis.ETA:
            methods = tuple(replace(m, params=m.params.replace(eta=value)) if isinstance(m, TargetMethod) else m
                            for m in methods)
        return array, sc, methods


@dataclass
class SweepResult:
    axis: SweepAxis
    values: tuple
    methods: tuple
    trials: int
    true_num_sources: int
    estimates: np.ndarray = field(repr=False)
    iterations: np.ndarray = field(repr=False)
    fit_errors: np.ndarray = field(repr=False)
    converged: np.ndarray = field(repr=False)
    structure_ok: np.ndarray = field(repr=False)
    keep_trials: bool = False
    label: str = ''

    # estimates and friends are (values, methods, trials) arrays.

    @property
    def correct(self):
        return (self.estimates == self.true_num_sources).sum(axis=2)

    @property
    def pcd(self):
        """``(values, methods)`` array of correct-detection frequencies."""
        return self.correct / self.trials

    @property
    def failures(self):
        return (self.estimates == FAILED).sum(axis=2)

    @property
    def mean_iterations(self):
        return self.iterations.mean(axis=2)

    @property
    def mean_fit_error(self):
        ok = ~np.isnan(self.fit_errors)
        total = np.where(ok, self.fit_errors, 0.0).sum(axis=2)
        count = ok.sum(axis=2)
        with np.errstate(invalid='ignore', divide='ignore'):
            return np.where(count > 0, total / np.maximum(count, 1), np.nan)

    def pcd_of(self, method):
        return self.pcd[:, self.methods.index(method)]

    def to_csv(self, path=None):
        """Summary table, one row per (axis value, method). Returns the text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator='\n')
        w.writerow(['axis_value', 'method', 'pcd', 'trials', 'failures', 'mean_iters', 'mean_fit_error'])
        pcd, fails, iters, fit = self.pcd, self.failures, self.mean_iterations, self.mean_fit_error
        for i, v in enumerate(self.values):
            for j, name in enumerate(self.methods):
                w.writerow([_fmt(v), name, _fmt(pcd[i, j]), self.trials, int(fails[i, j]),
                            _fmt(iters[i, j]), _fmt(fit[i, j])])
        return _emit(buf.getvalue(), path)

    def trials_to_csv(self, path=None):
        """Long-format per-trial table."""
        if not self.keep_trials:
            raise ConfigError('per-trial data was not retained; set keep_trials')
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator='\n')
        w.writerow(['axis_value', 'method', 'trial', 'estimate', 'true_k', 'iterations', 'fit_error',
                    'converged', 'structure_ok'])
        for i, v in enumerate(self.values):
            for j, name in enumerate(self.methods):
                for t in range(self.trials):
                    w.writerow([_fmt(v), name, t, int(self.estimates[i, j, t]), self.true_num_sources,
                                int(self.iterations[i, j, t]), _fmt(self.fit_errors[i, j, t]),
                                int(self.converged[i, j, t]), int(self.structure_ok[i, j, t])])
        return _emit(buf.getvalue(), path)


def _fmt(x):
    x = float(x)
    if np.isnan(x):
        return 'nan'
    return format(x, '.12g')


def _emit(text, path):
    if path is not None:
        with open(path, 'w', newline='') as f:
            f.write(text)
    return text


def run_sweep(spec, threads=1):
    """Runs every (axis value, trial) cell of ``spec`` and tallies PCD per method.

    Args:
        spec (SweepSpec): What to sweep.
        threads (int): Worker threads. The result is identical for any value.

    Returns:
        SweepResult
    """
    nv, nm, nt = len(spec.values), len(spec.methods), spec.trials
    estimates = np.zeros((nv, nm, nt), dtype=int)
    iterations = np.zeros((nv, nm, nt), dtype=int)
    fits = np.full((nv, nm, nt), np.nan)
    conv = np.zeros((nv, nm, nt), dtype=bool)
    struct_ok = np.zeros((nv, nm, nt), dtype=bool)

    points = [spec.at(v) for v in spec.values]

    def cell(job):
        i, t = job
        array, sc, methods = points[i]
        return i, t, _run_methods(array, sc, methods, trial_seed(spec.seed, spec.values[i], t))

    jobs = [(i, t) for i in range(nv) for t in range(nt)]
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            results = list(pool.map(cell, jobs))
    else:
        results = map(cell, jobs)
    for i, t, outcomes in results:
        for j, o in enumerate(outcomes):
            estimates[i, j, t] = o.estimate
            iterations[i, j, t] = o.iterations
            fits[i, j, t] = o.fit_error
            conv[i, j, t] = o.converged
            struct_ok[i, j, t] = o.structure_ok

    return SweepResult(axis=spec.axis, values=spec.values, methods=tuple(m.label for m in spec.methods),
                       trials=nt, true_num_sources=spec.true_num_sources, estimates=estimates,
                       iterations=iterations, fit_errors=fits, converged=conv, structure_ok=struct_ok,
                       keep_trials=spec.keep_trials, label=spec.label)


def tune_eta(spec, candidates, seed, method_label='target', threads=1):
    """Picks the ``eta`` with the best worst-case PCD over the sweep on a held-out seed.

    Ties go to the better mean PCD, then to the smaller ``eta``.

    Returns:
        tuple: ``(best_eta, {eta: pcd_per_value})``
    """
    j = [m.label for m in spec.methods].index(method_label)
    base = spec.methods[j]
    table = {}
    for eta in sorted(float(e) for e in candidates):
        tuned = replace(base, params=base.params.replace(eta=eta))
        res = run_sweep(spec.replace(methods=(tuned,), seed=seed, keep_trials=False), threads=threads)
        table[eta] = res.pcd[:, 0]
    best = max(table, key=lambda e: (table[e].min(), table[e].mean(), -e))
    return best, table


@dataclass
class FrameTrace:
    """Per-frame spectra of the smoothed covariance ``R`` and of the recovered ``L``."""

    R_values: np.ndarray
    L_values: np.ndarray
    estimates: np.ndarray
    iterations: np.ndarray

    @property
    def num_frames(self):
        return self.R_values.shape[0]

    def spacing_ratios(self):
        """Frame-averaged spacing ratios ``(r(R), r(L))``."""
        return frame_averaged_spacing_ratio(self.R_values), frame_averaged_spacing_ratio(self.L_values)

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator='\n')
        w.writerow(['frame', 'matrix', 'index', 'singular_value'])
        for f in range(self.num_frames):
            for name, vals in (('R', self.R_values[f]), ('L', self.L_values[f])):
                for i, s in enumerate(vals):
                    w.writerow([f, name, i, _fmt(s)])
        return _emit(buf.getvalue(), path)


def frame_covariances(array, sc, num_frames, frame_size=None):
    """FB-smoothed covariances of consecutive frames from one continuous recording.

    ``frame_size`` defaults to the scenario's snapshot count.
    """
    if int(num_frames) != num_frames or num_frames < 1:
        raise ConfigError(f'num_frames must be a positive integer, got {num_frames!r}')
    q = int(frame_size or sc.num_snapshots or FRAME_SNAPSHOTS)
    x = synthesize(array, sc.replace(num_snapshots=q * int(num_frames)))
    return [fb_smooth(sample_covariance(x[:, f * q:(f + 1) * q])) for f in range(int(num_frames))]


def singular_value_trace(array, sc, num_frames, params, frame_size=None, covariances=None):
    """Decomposes each frame and records the sorted singular values of ``R`` and ``L``."""
    if covariances is None:
        covariances = frame_covariances(array, sc, num_frames, frame_size)
    r_vals, l_vals, est, its = [], [], [], []
    for R in covariances:
        res = decompose(R, params)
        r_vals.append(sorted_singular_values(R))
        l_vals.append(res.singular_values)
        est.append(res.est_num_sources)
        its.append(res.iterations)
    return FrameTrace(np.array(r_vals), np.array(l_vals), np.array(est), np.array(its))


def spacing_ratio_vs_eta(array, sc, num_frames, params, etas, frame_size=None):
    """Frame-averaged ``r(L)`` for each ``eta`` on one shared set of frames."""
    covs = frame_covariances(array, sc, num_frames, frame_size)
    return {float(e): singular_value_trace(array, sc, num_frames, params.replace(eta=float(e)),
                                           covariances=covs).spacing_ratios()[1]
            for e in etas}
