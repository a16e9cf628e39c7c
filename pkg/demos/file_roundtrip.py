"""Writing snapshots to a TGT1 container and enumerating from the file.

The container is bit-exact, so the estimate from the file matches the
estimate from memory. A truncated copy is rejected with the byte offset.

Run:  python3 demos/file_roundtrip.py
"""
import tempfile
from pathlib import Path

import numpy as np

from toeplitz_enum import Scenario, ArrayConfig, SolverParams, decompose, fb_smooth, sample_covariance, synthesize
from toeplitz_enum import fileio
from toeplitz_enum.errors import DataError

x = synthesize(ArrayConfig(num_elements=3), Scenario.symmetric(2, 60, rho=0.8, snr_db=10, seed=4))

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / 'snapshots.tgt'
    fileio.save(path, x, fileio.Kind.SNAPSHOTS)
    y, kind = fileio.load(path)
    print(f'{path.name}: {path.stat().st_size} bytes, kind={kind.name}, identical={np.array_equal(x, y)}')

    est = decompose(fb_smooth(sample_covariance(y)), SolverParams(eta=0.2)).est_num_sources
    print('estimate from file:', est)

    path.write_bytes(path.read_bytes()[:100])
    try:
        fileio.load(path)
    except DataError as exc:
        print('truncated copy   :', exc)
