"""Minimal WAV (RIFF) decoding into normalized mono sample buffers.

Only the two encodings needed for bit-exact round trips are accepted: 16-bit
PCM and 32-bit IEEE float, little-endian. Multi-channel files are mixed down
to mono by the per-frame arithmetic mean; the mean is taken before amplitude
scaling so that N identical channels reproduce a single channel exactly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyAudio, MalformedHeader, UnsupportedEncoding

_FMT_PCM = 1
_FMT_IEEE_FLOAT = 3
_FMT_EXTENSIBLE = 0xFFFE

MIN_SAMPLE_RATE = 8000


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio signal with samples normalized to [-1, 1].

    Immutable (the sample array is marked read-only), so buffers can be
    shared freely across concurrent analysis tasks.
    """

    samples: np.ndarray
    sample_rate: int
    channel_count_original: int = 1

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64)
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    @property
    def duration(self) -> float:
        """Length of the signal in seconds."""
        return len(self.samples) / self.sample_rate

    def scaled(self, gain: float) -> "AudioBuffer":
        """Copy with every sample multiplied by ``gain`` (no clipping)."""
        return AudioBuffer(self.samples * gain, self.sample_rate,
                           self.channel_count_original)


def _read_chunks(data: bytes) -> dict[bytes, bytes]:
    chunks: dict[bytes, bytes] = {}
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise MalformedHeader(f"truncated chunk {cid!r}")
        if cid not in chunks:  # first occurrence wins
            chunks[cid] = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    return chunks


def load_wav(path: str | Path) -> AudioBuffer:
    """Decode a PCM16 or float32 WAV file into an :class:`AudioBuffer`.

    Parameters
    ----------
    path:
        File to read. Must be RIFF/WAVE with fmt tag 1 (16-bit PCM) or
        3 (32-bit IEEE float); WAVE_FORMAT_EXTENSIBLE wrapping either of
        those is unwrapped.

    Raises
    ------
    MalformedHeader
        Not a WAV container, or required chunks missing/truncated.
    UnsupportedEncoding
        Any other codec/bit depth, or sample rate below 8 kHz.
    EmptyAudio
        The data chunk holds zero sample frames.
    """
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedHeader(f"{path}: not a RIFF/WAVE file")
    chunks = _read_chunks(data)
    if b"fmt " not in chunks or b"data" not in chunks:
        raise MalformedHeader(f"{path}: missing fmt/data chunk")

    fmt = chunks[b"fmt "]
    if len(fmt) < 16:
        raise MalformedHeader(f"{path}: fmt chunk too short")
    tag, n_channels, sample_rate, _, block_align, bits = struct.unpack_from(
        "<HHIIHH", fmt, 0)
    if tag == _FMT_EXTENSIBLE:
        if len(fmt) < 26:
            raise MalformedHeader(f"{path}: extensible fmt chunk too short")
        (tag,) = struct.unpack_from("<H", fmt, 24)  # first 2 bytes of SubFormat

    if n_channels < 1:
        raise MalformedHeader(f"{path}: zero channels")
    if sample_rate < MIN_SAMPLE_RATE:
        raise UnsupportedEncoding(
            f"{path}: sample rate {sample_rate} below {MIN_SAMPLE_RATE} Hz")
    if tag == _FMT_PCM and bits == 16:
        dtype = np.dtype("<i2")
    elif tag == _FMT_IEEE_FLOAT and bits == 32:
        dtype = np.dtype("<f4")
    else:
        raise UnsupportedEncoding(
            f"{path}: format tag {tag} with {bits} bits not supported")

    body = chunks[b"data"]
    frame_bytes = dtype.itemsize * n_channels
    n_frames = len(body) // frame_bytes
    if n_frames == 0:
        raise EmptyAudio(f"{path}: no samples")
    raw = np.frombuffer(body[:n_frames * frame_bytes], dtype=dtype)
    frames = raw.reshape(n_frames, n_channels).astype(np.float64)
    mono = frames.mean(axis=1) if n_channels > 1 else frames[:, 0]
    if dtype.kind == "i":
        mono = mono / 32768.0
    else:
        mono = np.clip(mono, -1.0, 1.0)
    return AudioBuffer(mono, int(sample_rate), int(n_channels))


def save_wav(path: str | Path, audio: AudioBuffer,
             encoding: str = "pcm16") -> None:
    """Write a mono buffer as WAV (``pcm16`` or ``float32``)."""
    if encoding == "pcm16":
        tag, bits = _FMT_PCM, 16
        q = np.clip(np.rint(audio.samples * 32768.0), -32768, 32767)
        payload = q.astype("<i2").tobytes()
    elif encoding == "float32":
        tag, bits = _FMT_IEEE_FLOAT, 32
        payload = audio.samples.astype("<f4").tobytes()
    else:
        raise ValueError(f"unknown encoding {encoding!r}")
    block_align = bits // 8
    fmt = struct.pack("<HHIIHH", tag, 1, audio.sample_rate,
                      audio.sample_rate * block_align, block_align, bits)
    pad = b"\x00" if len(payload) & 1 else b""
    body = (b"WAVE"
            + b"fmt " + struct.pack("<I", len(fmt)) + fmt
            + b"data" + struct.pack("<I", len(payload)) + payload + pad)
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", len(body)) + body)
