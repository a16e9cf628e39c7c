"""Probability of correct detection versus SNR, against eigenvalue baselines.

A shortened version of the bundled ``fig1d`` preset: 50 trials per point
instead of 200. Every method sees the same realization in each trial.

Run:  python3 demos/snr_sweep.py
"""
from toeplitz_enum.config import load_preset
from toeplitz_enum.experiments import run_sweep

spec = load_preset('fig1d').sweep_specs(trials=50)[0]
result = run_sweep(spec)

print('SNR(dB) ' + ' '.join(f'{m:>9s}' for m in result.methods))
for value, row in zip(result.values, result.pcd):
    print(f'{value:7g} ' + ' '.join(f'{p:9.2f}' for p in row))

# The same table as CSV, exactly what `toeplitz-enum sweep` writes.
print()
print(result.to_csv())
