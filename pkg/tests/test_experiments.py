import numpy as np
import pytest

from toeplitz_enum import ArrayConfig, BaselineKind, Scenario, SolverParams
from toeplitz_enum.errors import ConfigError
from toeplitz_enum.experiments import (FAILED, BaselineMethod, SweepAxis, SweepSpec, TargetMethod, frame_covariances,
                                       run_sweep, run_trial, singular_value_trace, spacing_ratio_vs_eta, trial_seed,
                                       tune_eta)

ARRAY = ArrayConfig(num_elements=3)
SCENARIO = Scenario.symmetric(2, 70, rho=0.8, num_snapshots=200)
TARGET = TargetMethod(SolverParams(eta=0.2))


def small_spec(**kw):
    base = dict(array=ARRAY, base_scenario=SCENARIO, axis='snr', values=(0.0, 10.0),
                methods=(TARGET, BaselineMethod(BaselineKind.MDL)), trials=6, seed=4)
    base.update(kw)
    return SweepSpec(**base)


def test_trial_seed_is_pure():
    a = trial_seed(1, 5.0, 3).generate_state(4)
    assert np.array_equal(a, trial_seed(1, 5.0, 3).generate_state(4))
    assert not np.array_equal(a, trial_seed(1, 5.0, 4).generate_state(4))
    assert not np.array_equal(a, trial_seed(1, 10.0, 3).generate_state(4))


def test_run_trial_high_snr_oracle():
    sc = SCENARIO.replace(snr_db=20)
    assert run_trial(ARRAY, sc, TARGET, trial_seed(0, 20.0, 0)) == 2
    one = Scenario(angles_deg=(0.0,), snr_db=20)
    assert run_trial(ARRAY, one, TARGET, 7) == 1
    assert run_trial(ARRAY, one, BaselineMethod(BaselineKind.MDL), 7) == 1


def test_failed_trial_is_marked():
    # MDL needs Q >= M; with Q = 2 it reports a failure instead of raising.
    sc = SCENARIO.replace(num_snapshots=2)
    assert run_trial(ARRAY, sc, BaselineMethod(BaselineKind.MDL), 0) == FAILED


def test_pcd_counts_matches():
    res = run_sweep(small_spec(keep_trials=True))
    manual = (res.estimates == 2).mean(axis=2)
    np.testing.assert_allclose(res.pcd, manual)
    assert res.pcd.shape == (2, 2)
    assert res.structure_ok[:, 0].all()
    assert res.trials_to_csv().count('\n') == 1 + 2 * 2 * 6


def test_sweep_is_independent_of_thread_count():
    spec = small_spec()
    a = run_sweep(spec, threads=1).to_csv()
    b = run_sweep(spec, threads=3).to_csv()
    assert a == b
    assert a.splitlines()[0] == 'axis_value,method,pcd,trials,failures,mean_iters,mean_fit_error'


def test_axis_application():
    spec = small_spec(axis='delta_theta', values=(30.0, 50.0))
    assert spec.at(50.0)[1].angles_deg == (-25.0, 25.0)
    spec = small_spec(axis='m', values=(3.0, 5.0))
    assert spec.at(5.0)[0].size == 5
    spec = small_spec(axis='eta', values=(0.5, 1.0))
    assert spec.at(1.0)[2][0].params.eta == 1.0
    spec = small_spec(axis='rho', values=(0.0, 0.9))
    assert spec.at(0.9)[1].correlation[0, 1] == pytest.approx(0.9)
    assert SweepAxis('q') is SweepAxis.Q


def test_spec_validation():
    with pytest.raises(ConfigError):
        small_spec(values=(10.0, 0.0))
    with pytest.raises(ConfigError):
        small_spec(trials=0)
    with pytest.raises(ConfigError):
        small_spec(methods=(TARGET, TARGET))
    with pytest.raises(ConfigError):
        small_spec(axis='eta', methods=(BaselineMethod(BaselineKind.MDL),))


def test_tune_eta_prefers_best_worst_case():
    best, table = tune_eta(small_spec(trials=4), [0.2, 50.0], seed=99)
    assert best == 0.2
    assert table[0.2].min() >= table[50.0].min()


def test_frames_come_from_one_recording():
    sc = Scenario(angles_deg=(0.0,), num_snapshots=50, seed=2)
    covs = frame_covariances(ARRAY, sc, 3)
    assert len(covs) == 3
    assert not np.allclose(covs[0], covs[1])
    with pytest.raises(ConfigError):
        frame_covariances(ARRAY, sc, 0)


def test_singular_value_trace_one_vs_two_sources():
    p = SolverParams(eta=1.0)
    one = singular_value_trace(ARRAY, Scenario(angles_deg=(0.0,), snr_db=10, seed=1), 9, p)
    assert one.L_values.shape == (9, 3)
    assert np.all(one.estimates == 1)
    two = singular_value_trace(ARRAY, Scenario.symmetric(2, 80, rho=0.8, snr_db=10, seed=1), 9, p)
    assert np.all(two.estimates == 2)
    assert two.to_csv().count('\n') == 1 + 9 * 2 * 3


def test_spacing_ratio_vs_eta_keys():
    sc = Scenario(angles_deg=(0.0,), noise_variances=(1000.0,) * 3, seed=7)
    out = spacing_ratio_vs_eta(ARRAY, sc, 3, SolverParams(eta=1.0), [1.0, 2.0])
    assert set(out) == {1.0, 2.0}
