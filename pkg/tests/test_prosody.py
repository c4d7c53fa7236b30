import numpy as np
import pytest

from entrain._kernels import available_backends
from entrain.audio import AudioBuffer
from entrain.errors import AudioTooShort, InvalidConfig
from entrain.prosody import (FrameConfig, pitch_autocorrelation,
                             rms_intensity, write_frame_track_csv)

from conftest import SR, sine, sine_buffer

CFG = FrameConfig()


def test_full_scale_sine_intensity():
    # 200 Hz at 16 kHz: every 40 ms frame spans whole periods, RMS = A/sqrt(2)
    buf = sine_buffer(200, 1.0, amplitude=1.0)
    track = rms_intensity(buf, CFG)
    assert track.values == pytest.approx(-3.0103, abs=2e-3)
    assert not track.silent.any()


def test_half_scale_sine_intensity():
    buf = sine_buffer(200, 1.0, amplitude=0.5)
    track = rms_intensity(buf, CFG)
    # direct-summation oracle on the first frame
    frame = buf.samples[:640]
    expect = 20 * np.log10(np.sqrt((frame ** 2).mean()) + 1e-10)
    assert track.values[0] == pytest.approx(expect, abs=1e-12)
    assert track.values == pytest.approx(-9.0309, abs=2e-3)


def test_all_zero_frames_hit_epsilon_floor():
    buf = AudioBuffer(np.zeros(SR), SR)
    track = rms_intensity(buf, CFG)
    assert np.all(track.values == pytest.approx(-200.0))
    assert track.silent.all()


def test_intensity_gain_shift():
    buf = sine_buffer(220, 0.5, amplitude=0.2)
    g = 2.5
    t1 = rms_intensity(buf, CFG)
    t2 = rms_intensity(buf.scaled(g), CFG)
    # tolerance set by the 1e-10 epsilon inside the dB conversion
    assert t2.values - t1.values == pytest.approx(20 * np.log10(g), abs=1e-7)


def test_too_short_audio():
    with pytest.raises(AudioTooShort):
        rms_intensity(AudioBuffer(np.zeros(100), SR), CFG)
    with pytest.raises(AudioTooShort):
        pitch_autocorrelation(AudioBuffer(np.zeros(100), SR), CFG)


@pytest.mark.parametrize("freq", [110.0, 220.0, 440.0])
def test_sine_pitch_within_one_percent(freq):
    track = pitch_autocorrelation(sine_buffer(freq, 1.0), CFG)
    assert track.voiced.mean() > 0.95
    got = track.values[track.voiced]
    assert np.all(np.abs(got - freq) <= 0.01 * freq)


def test_quiet_white_noise_unvoiced(rng):
    x = rng.normal(scale=1e-3, size=SR)  # ~ -60 dB
    track = pitch_autocorrelation(AudioBuffer(x, SR), CFG)
    assert not track.voiced.any()
    assert np.isnan(track.values).all()


def test_two_plateau_signal():
    x = np.concatenate([sine(220, 1.0), sine(330, 1.0)])
    track = pitch_autocorrelation(AudioBuffer(x, SR), CFG)
    first = track.values[(track.times < 0.9) & track.voiced]
    second = track.values[(track.times > 1.1) & track.voiced]
    assert len(first) > 50 and len(second) > 50
    assert np.all(np.abs(first - 220) <= 2.2)
    assert np.all(np.abs(second - 330) <= 3.3)


def test_pitch_gain_invariance():
    buf = sine_buffer(150, 0.6, amplitude=0.1)
    t1 = pitch_autocorrelation(buf, CFG)
    t2 = pitch_autocorrelation(buf.scaled(7.0), CFG)
    assert np.array_equal(t1.voiced, t2.voiced)
    assert t1.values[t1.voiced] == pytest.approx(t2.values[t2.voiced], abs=1e-6)


def test_pitch_stays_in_configured_range(rng):
    x = rng.normal(scale=0.3, size=SR) + sine(90, 1.0, amplitude=0.4)
    track = pitch_autocorrelation(AudioBuffer(x, SR), CFG)
    v = track.values[track.voiced]
    assert np.all((v >= CFG.pitch_floor) & (v <= CFG.pitch_ceiling))


def test_time_reversal_mirrors_voicing():
    # length chosen so frames of the reversed signal align with reversed frames
    x = np.concatenate([sine(220, 0.5), np.zeros(int(0.25 * SR)), sine(300, 0.29)])
    n_keep = (len(x) - 640) // 160 * 160 + 640
    x = x[:n_keep]
    fwd = pitch_autocorrelation(AudioBuffer(x, SR), CFG)
    rev = pitch_autocorrelation(AudioBuffer(x[::-1], SR), CFG)
    assert np.array_equal(rev.voiced, fwd.voiced[::-1])


def test_invalid_configs():
    buf = sine_buffer(220, 1.0)
    with pytest.raises(InvalidConfig):
        pitch_autocorrelation(buf, FrameConfig(frame_length=0.02, hop=0.01))
    with pytest.raises(InvalidConfig):
        pitch_autocorrelation(buf, FrameConfig(pitch_ceiling=9000.0))
    with pytest.raises(InvalidConfig):
        FrameConfig(hop=0.05)  # hop > frame_length
    with pytest.raises(InvalidConfig):
        FrameConfig(pitch_floor=700.0)


def test_track_csv_dump(tmp_path):
    track = pitch_autocorrelation(sine_buffer(220, 0.2), CFG)
    out = tmp_path / "track.csv"
    write_frame_track_csv(track, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "time_s,value,voiced"
    assert len(lines) == len(track) + 1


def test_backends_agree():
    backends = available_backends()
    if "compiled" not in backends:
        pytest.skip("compiled kernels not built")
    x = np.concatenate([sine(220, 0.4), np.zeros(1600), sine(347, 0.4)])
    py, cy = backends["python"], backends["compiled"]
    rms_py = py.frame_rms(x, 640, 160)
    rms_cy = cy.frame_rms(x, 640, 160)
    assert rms_cy == pytest.approx(rms_py, rel=1e-12, abs=1e-15)
    n_frames = 1 + (len(x) - 640) // 160
    c_py = py.nccf_block(x, 640, 160, 27, 213, 0, n_frames)
    c_cy = cy.nccf_block(x, 640, 160, 27, 213, 0, n_frames)
    assert np.abs(c_cy - c_py).max() < 1e-9
