import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfwigner import trajectory as tr
from rfwigner.dynamics import ChannelSet, DriveParams, sigma_minus_ss_analytic, steady_state_numeric
from rfwigner.modefilter import boxcar, exponential


def reference_run(cfg, filt, key):
    """Dense-matrix integration of one trajectory with the kernel's noise."""
    step = tr.kraus_step if cfg.integrator == "kraus" else tr.sme_step
    n_wait, n_win = cfg.n_wait, cfg.n_window
    dW = tr.wiener_increments(cfg, key, n_wait + n_win)
    w = filt.weights(cfg.dt)
    rho = cfg.initial_state()
    J = 0.0
    for i in range(n_wait + n_win):
        if i >= n_wait:
            J += w[i - n_wait] * tr.photocurrent_increment(rho, cfg, dW[i])
        rho = step(rho, cfg, dW[i])
    return J, rho


CASES = [
    (DriveParams(0.6, 0.9), ChannelSet.infinite(0.5, 0.5, gamma_phi=0.2, gamma_nr=0.1), 0.4, False),
    (DriveParams(1 / math.sqrt(8)), ChannelSet(), 1.1, True),
]


@pytest.mark.parametrize("integrator", ["kraus", "euler"])
@pytest.mark.parametrize("drive, channels, theta, offset", CASES)
@pytest.mark.parametrize("substeps", [1, 3])
def test_kernel_matches_dense_reference(integrator, drive, channels, theta, offset, substeps):
    # plain Euler loses positivity within a few steps of a pure state
    init = "ground" if integrator == "kraus" else np.array([[0.7, 0.1j], [-0.1j, 0.3]])
    cfg = tr.SmeConfig(drive, channels, theta=theta, dt=1e-3, t0=0.2, T=0.3, seed=11, initial=init,
                       integrator=integrator, drive_offset=offset, noise_substeps=substeps)
    filt = exponential(0.2, 1.3, 0.3)
    rec = tr.run_trajectory(cfg, filt)
    J, rho = reference_run(cfg, filt, cfg.seed)
    assert rec.J == pytest.approx(J, abs=1e-11)
    assert np.allclose(rec.final_state, rho, atol=1e-11)


def test_fixed_seed_is_bitwise_reproducible():
    cfg = tr.SmeConfig(DriveParams(0.35), ChannelSet(), t0=1.0, T=1.0, seed=5)
    a = tr.run_trajectory(cfg, boxcar(1.0, 1.0))
    b = tr.run_trajectory(cfg, boxcar(1.0, 1.0))
    assert a.J == b.J and np.array_equal(a.final_state, b.final_state)


def test_ensemble_independent_of_workers_and_chunks():
    cfg = tr.SmeConfig(DriveParams(0.35), ChannelSet(), t0=0.5, T=0.5, seed=9)
    f = boxcar(0.5, 0.5)
    thetas = [0.0, 0.3, 1.2]
    a = tr.simulate_ensemble(cfg, f, 37, thetas, workers=1, chunk=250)
    b = tr.simulate_ensemble(cfg, f, 37, thetas, workers=3, chunk=5)
    assert np.array_equal(a.J, b.J) and np.array_equal(a.seeds, b.seeds)
    assert len(a) == 111
    assert np.array_equal(a.thetas, np.repeat(thetas, 37))


def test_ensemble_trajectory_uses_split_seed():
    from rfwigner.rng import split_seed
    cfg = tr.SmeConfig(DriveParams(0.35), ChannelSet(), t0=0.5, T=0.5, seed=9)
    f = boxcar(0.5, 0.5)
    ens = tr.simulate_ensemble(cfg, f, 4, [0.0, 0.7])
    single = tr.SmeConfig(cfg.drive, cfg.channels, theta=0.7, t0=0.5, T=0.5, seed=split_seed(9, 1, 2))
    assert tr.run_trajectory(single, f).J == ens.J[6]


def test_rejects_bad_arguments():
    cfg = tr.SmeConfig(DriveParams(0.35), ChannelSet(), t0=1.0, T=1.0)
    with pytest.raises(ValueError):
        tr.simulate_ensemble(cfg, boxcar(1.0, 1.0), 0, [0.0])
    with pytest.raises(ValueError):
        tr.run_trajectory(cfg, boxcar(0.0, 1.0))
    with pytest.raises(ValueError):
        tr.SmeConfig(DriveParams(0.35), ChannelSet(), dt=3e-3, T=1.0)


def test_euler_with_coarse_step_reports_lost_positivity():
    cfg = tr.SmeConfig(DriveParams(3.0), ChannelSet(), t0=0.0, T=20.0, dt=0.1,
                       integrator="euler", seed=2)
    with pytest.raises(tr.StepSizeError):
        tr.simulate_ensemble(cfg, boxcar(0.0, 20.0), 50, [0.0])


@settings(max_examples=15)
@given(st.floats(0.0, 2.0), st.floats(0.0, 2 * math.pi), st.floats(0.0, 0.5),
       st.integers(0, 2**63))
def test_conditional_states_stay_physical(w, phi, gphi, seed):
    cfg = tr.SmeConfig(DriveParams(w, phi), ChannelSet(gamma_phi=gphi), t0=0.0, T=2.0, seed=seed)
    ens = tr.simulate_ensemble(cfg, boxcar(0.0, 2.0), 20, [0.0, 1.0])
    for rho in ens.states:
        assert abs(np.trace(rho) - 1) < 1e-9
        assert np.linalg.eigvalsh(rho).min() >= -1e-6


def test_records_round_trip(tmp_path):
    cfg = tr.SmeConfig(DriveParams(0.35), ChannelSet(), t0=0.0, T=0.5, seed=3)
    recs = tr.run_ensemble(cfg, boxcar(0.0, 0.5), 10, [0.0, 0.25])
    path = tmp_path / "r.csv"
    tr.write_records(path, recs)
    assert path.read_text().splitlines()[0] == "theta_rad,J,seed"
    thetas, J, seeds = tr.read_records(path)
    assert np.array_equal(J, [r.J for r in recs])
    assert np.array_equal(thetas, [r.theta for r in recs])
    assert [int(s) for s in seeds] == [r.seed for r in recs]


def test_steady_state_mean_signal_matches_closed_form():
    drive, ch, T = DriveParams(1 / math.sqrt(8)), ChannelSet(), 4.0
    cfg = tr.SmeConfig(drive, ch, t0=0.0, T=T, initial="steady", seed=21)
    J = tr.simulate_ensemble(cfg, boxcar(0.0, T), 4000, [0.0]).J
    expected = math.sqrt(2 * T) * sigma_minus_ss_analytic(drive, ch).real
    assert abs(J.mean() - expected) < 5 * J.std() / math.sqrt(J.size)


def test_drive_offset_shifts_mean_by_reflected_drive():
    drive, ch, T = DriveParams(0.05), ChannelSet(), 4.0
    cfg = tr.SmeConfig(drive, ch, t0=0.0, T=T, initial="steady", seed=4, drive_offset=True)
    J = tr.simulate_ensemble(cfg, boxcar(0.0, T), 4000, [0.0]).J
    expected = math.sqrt(2 * T) * (0.05 + sigma_minus_ss_analytic(drive, ch).real)
    assert abs(J.mean() - expected) < 5 * J.std() / math.sqrt(J.size)


def test_halving_dt_is_within_monte_carlo_error():
    drive, ch, T = DriveParams(1 / math.sqrt(8)), ChannelSet(), 4.0
    f = boxcar(0.0, T)
    coarse = tr.SmeConfig(drive, ch, t0=0.0, T=T, dt=2e-3, initial="steady", seed=8, noise_substeps=2)
    fine = tr.SmeConfig(drive, ch, t0=0.0, T=T, dt=1e-3, initial="steady", seed=8)
    a = tr.simulate_ensemble(coarse, f, 10_000, [0.0]).J
    b = tr.simulate_ensemble(fine, f, 10_000, [0.0]).J
    assert abs(a.mean() - b.mean()) < b.std() / math.sqrt(b.size)


def test_warmup_and_steady_start_agree_statistically():
    drive, ch = DriveParams(1 / math.sqrt(8)), ChannelSet()
    rho_ss = steady_state_numeric(drive, ch)
    warm = tr.SmeConfig(drive, ch, t0=15.0, T=1.0, seed=1)
    ens = tr.simulate_ensemble(warm, boxcar(15.0, 1.0), 2000, [0.0])
    mean = ens.states.mean(axis=0)
    se = ens.states.std(axis=0) / math.sqrt(len(ens))
    assert np.all(np.abs(mean - rho_ss) < 5 * se + 1e-12)
