import struct

import numpy as np
import pytest

from entrain.audio import AudioBuffer, load_wav, save_wav
from entrain.errors import EmptyAudio, MalformedHeader, UnsupportedEncoding

from conftest import sine


def _write_pcm16(path, data, sr=16000, channels=1):
    payload = np.asarray(data, dtype="<i2").tobytes()
    fmt = struct.pack("<HHIIHH", 1, channels, sr, sr * 2 * channels,
                      2 * channels, 16)
    body = (b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
            + b"data" + struct.pack("<I", len(payload)) + payload)
    path.write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)


def test_pcm16_normalization(tmp_path):
    p = tmp_path / "x.wav"
    _write_pcm16(p, [32767, -32768, 0, 16384])
    buf = load_wav(p)
    assert buf.samples[0] == pytest.approx(32767 / 32768)
    assert buf.samples[1] == -1.0
    assert buf.samples[2] == 0.0
    assert buf.samples[3] == 0.5
    assert buf.sample_rate == 16000
    assert buf.channel_count_original == 1


def test_stereo_mean_mixdown(tmp_path):
    p = tmp_path / "st.wav"
    _write_pcm16(p, [16384, -16384, 100, 200], channels=2)  # frames (L,R)
    buf = load_wav(p)
    assert buf.samples[0] == 0.0          # (0.5 - 0.5) / 2
    assert buf.samples[1] == pytest.approx(150 / 32768)
    assert buf.channel_count_original == 2


@pytest.mark.parametrize("n_channels", [2, 3, 4, 7])
def test_identical_channels_mixdown_exact(tmp_path, n_channels):
    rng = np.random.default_rng(0)
    mono = (rng.uniform(-1, 1, 500) * 32767).astype(np.int16)
    interleaved = np.repeat(mono, n_channels)
    p = tmp_path / "multi.wav"
    _write_pcm16(p, interleaved, channels=n_channels)
    ref = tmp_path / "ref.wav"
    _write_pcm16(ref, mono, channels=1)
    assert np.array_equal(load_wav(p).samples, load_wav(ref).samples)


@pytest.mark.parametrize("encoding", ["pcm16", "float32"])
def test_roundtrip_within_one_lsb(tmp_path, encoding):
    x = sine(220, 0.25)
    buf = AudioBuffer(x, 16000)
    p = tmp_path / "rt.wav"
    save_wav(p, buf, encoding)
    back = load_wav(p)
    lsb = 1 / 32768 if encoding == "pcm16" else 2.0 ** -24
    assert len(back.samples) == len(x)
    assert np.abs(back.samples - x).max() <= lsb


def test_float32_loader(tmp_path):
    x = np.array([0.25, -0.5, 1.0, -1.0])
    save_wav(tmp_path / "f.wav", AudioBuffer(x, 16000), "float32")
    assert np.array_equal(load_wav(tmp_path / "f.wav").samples, x)


def test_junk_magic_rejected(tmp_path):
    p = tmp_path / "junk.wav"
    _write_pcm16(p, [1, 2, 3])
    data = bytearray(p.read_bytes())
    data[:4] = b"JUNK"
    p.write_bytes(bytes(data))
    with pytest.raises(MalformedHeader):
        load_wav(p)


def test_truncated_file_rejected(tmp_path):
    p = tmp_path / "trunc.wav"
    _write_pcm16(p, list(range(100)))
    p.write_bytes(p.read_bytes()[:40])
    with pytest.raises(MalformedHeader):
        load_wav(p)


def test_unsupported_bit_depth(tmp_path):
    p = tmp_path / "u8.wav"
    payload = bytes(range(16))
    fmt = struct.pack("<HHIIHH", 1, 1, 16000, 16000, 1, 8)
    body = (b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
            + b"data" + struct.pack("<I", len(payload)) + payload)
    p.write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)
    with pytest.raises(UnsupportedEncoding):
        load_wav(p)


def test_low_sample_rate_rejected(tmp_path):
    p = tmp_path / "slow.wav"
    _write_pcm16(p, [0, 1, 2], sr=4000)
    with pytest.raises(UnsupportedEncoding):
        load_wav(p)


def test_empty_data_rejected(tmp_path):
    p = tmp_path / "empty.wav"
    _write_pcm16(p, [])
    with pytest.raises(EmptyAudio):
        load_wav(p)


def test_buffer_is_immutable():
    buf = AudioBuffer(np.zeros(10), 16000)
    with pytest.raises(ValueError):
        buf.samples[0] = 1.0
