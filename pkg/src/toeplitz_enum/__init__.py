"""Source enumeration for compact uniform linear arrays by low-rank Toeplitz plus diagonal decomposition."""
from .array_model import (ArrayConfig, Scenario, population_covariance, steering_matrix,
                          steering_vector, symmetric_angles, synthesize, uniform_correlation)
from .baselines import BaselineKind, enumerate_baseline
from .covariance import (eigen_spacing_ratio, fb_smooth, frame_averaged_spacing_ratio,
                         sample_covariance, sorted_eigenvalues)
from .errors import ConfigError, DataError, DomainError, EnumerationError, NumericalError
from .experiments import (BaselineMethod, SweepAxis, SweepResult, SweepSpec, TargetMethod, run_sweep,
                          run_trial, singular_value_trace)
from .solver import (DecompResult, SolverParams, decompose, estimate_rank, project_nonneg_diag,
                     project_toeplitz, svt_step, truncate_top_k)

__version__ = '0.1.0'
