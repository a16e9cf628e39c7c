"""Singular values over consecutive frames for one and for two sources.

With one source the recovered Toeplitz part has a single dominant singular
value. With two it has two. The spacing ratio
r = (s1 - s2) / (s2 - s3), averaged over frames, separates the cases, and it
barely moves as the regularization weight changes.

The noise power is set to 1000 so the data sit on a scale where eta in [1, 5]
is a mild penalty.

Run:  python3 demos/frame_trace.py
"""
import numpy as np

from toeplitz_enum import ArrayConfig, Scenario, SolverParams
from toeplitz_enum.experiments import singular_value_trace, spacing_ratio_vs_eta

array = ArrayConfig(num_elements=3)
params = SolverParams(eta=1.0, mu=0.2, max_iters=5000)
noise = (1000.0,) * 3

cases = {
    'one source ': Scenario(angles_deg=(0.0,), snr_db=10, noise_variances=noise, seed=7),
    'two sources': Scenario.symmetric(2, 80, rho=0.8, snr_db=10, noise_variances=noise, seed=7),
}
for name, sc in cases.items():
    trace = singular_value_trace(array, sc, 9, params)
    r_R, r_L = trace.spacing_ratios()
    print(f'{name}: mean sv(R) {np.round(trace.R_values.mean(0), 0)}  mean sv(L) {np.round(trace.L_values.mean(0), 0)}')
    print(f'             r(R) = {r_R.value:.2f}   r(L) = {r_L.value:.2f}   estimates {trace.estimates.tolist()}')

print()
print('one source, r(L) as eta varies:')
for eta, r in spacing_ratio_vs_eta(array, cases['one source '], 9, params, [1, 2, 3, 4, 5]).items():
    print(f'  eta = {eta:g}: {r.value:.2f}')
