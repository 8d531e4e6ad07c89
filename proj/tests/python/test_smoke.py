"""Smoke tests for the python bindings: each main operation is exercised
once against a value the C++ suite pins down independently."""

import math

import numpy as np
import pytest

import morpi


def sine_spec(speed=0.6):
    spec = morpi.TrajectorySpec()
    spec.shape = morpi.TrajectoryShape.Sine
    spec.length_m = 6.3
    spec.amplitude_m = 0.1
    spec.period_m = 1.0
    spec.speed_mps = speed
    return spec


@pytest.fixture(scope="module")
def sine_run():
    truth = morpi.generate_truth(sine_spec())
    return truth, morpi.imu_from_truth(truth)


def test_sequence_from_arrays_roundtrip():
    t = np.arange(200) / 100.0
    f = np.tile([0.0, 0.0, -9.81], (200, 1))
    w = np.zeros((200, 3))
    seq = morpi.ImuSequence(t, f, w)
    assert len(seq) == 200
    assert seq.rate_hz == pytest.approx(100.0)
    np.testing.assert_allclose(seq.f[:, 2], -9.81)

    bad_t = t.copy()
    bad_t[5] = bad_t[4]
    with pytest.raises(morpi.StructuralError):
        morpi.ImuSequence(bad_t, f, w)


def test_simulate_and_mechanize_roundtrip(sine_run):
    truth, imu = sine_run
    nav = morpi.mechanize_3d(imu)
    end = nav.travelled_endpoint()
    assert np.linalg.norm(end - truth.endpoint()) < 5e-3
    assert truth.path_length > 6.3


def test_file_io_roundtrip(tmp_path, sine_run):
    _, imu = sine_run
    path = tmp_path / "imu.csv"
    morpi.save_imu_file(path, imu)
    back = morpi.load_imu_file(path)
    assert len(back) == len(imu)
    np.testing.assert_array_equal(back.f, imu.f)


def test_stationary_and_calibration(sine_run):
    _, imu = sine_run
    sensor = morpi.SensorSpec.mpu6500()
    noisy = morpi.corrupt(imu, sensor, 11)

    windows = morpi.detect_stationary(noisy)
    assert windows[0].start_idx == 0
    assert windows[0].duration == pytest.approx(3.0, abs=0.5)

    calib = morpi.calibrate(noisy, morpi.CalibMode.GC)
    np.testing.assert_allclose(calib.gyro_bias, sensor.gyro_bias, atol=2e-3)

    cal = morpi.apply_calibration(noisy, calib, morpi.CalibMode.GC)
    assert abs(np.mean(cal.w[:200, 0])) < 1e-3


def test_morpi_pipeline_closure(sine_run):
    truth, imu = sine_run
    gain = morpi.estimate_gain([(imu, 6.3)], morpi.MorpiMode.G)
    assert gain.training_runs == 1

    track = morpi.run_morpi(imu, morpi.MorpiMode.G, morpi.CalibMode.RD, gain)
    assert sum(track.segment_distances) == pytest.approx(6.3, rel=1e-9)

    meters, percent = morpi.endpoint_error(
        track.endpoint(), truth.endpoint(), 6.3)
    assert percent < 1.0

    peaks = morpi.detect_peaks(imu, morpi.MorpiMode.G)
    assert len(peaks.indices) >= 5


def test_gain_file_roundtrip(tmp_path):
    gain = morpi.WeinbergGain(0.61, morpi.MorpiMode.A)
    path = tmp_path / "gain.txt"
    morpi.save_gain(path, gain, "cafe0123")
    back = morpi.load_gain(path)
    assert back.value == 0.61
    assert back.mode == morpi.MorpiMode.A


def test_dead_reckoning():
    track = morpi.dead_reckon([1.0, 1.0], [math.pi / 2, math.pi / 2])
    np.testing.assert_allclose(track.endpoint(), [0.0, 2.0], atol=1e-12)


def test_error_model_values():
    inputs = morpi.ErrorInputs()
    inputs.ba = np.array([0.588, 0.0, 0.0])
    assert morpi.ins_error_2d(5.0, inputs) == pytest.approx(7.35)
    assert morpi.ins_error_3d(5.0, inputs) == pytest.approx(7.35)
    assert inputs.alpha == pytest.approx(9.81)

    phi = morpi.transition_matrix(0.0, inputs)
    np.testing.assert_array_equal(phi, np.eye(15))

    ds = morpi.morpi_error(0.1, [1.0, 1.0, 1.0], 0.6)
    np.testing.assert_allclose(ds, [0.06, 0.12, 0.18])


def test_monte_carlo_check():
    spec = morpi.TrajectorySpec()
    spec.shape = morpi.TrajectoryShape.Straight
    spec.length_m = 2.0
    spec.speed_mps = 0.5
    spec.head_stationary_s = 0.0
    spec.tail_stationary_s = 0.0

    inputs = morpi.ErrorInputs()
    inputs.ba = np.array([0.05, 0.02, 0.0])
    report = morpi.monte_carlo_check(spec, inputs, 1, 1)
    closed = np.array(report.closed_3d)
    mech = np.array(report.mean_3d)
    assert np.all(np.abs(mech - closed) <= np.maximum(0.01 * closed, 1e-3))
