import io
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermprint.core import (
    DissipationVector,
    DomainError,
    FormatError,
    FrameSequence,
    GrayFrame,
    RawFrame,
    SinkWriteError,
    TruncatedError,
    UnsupportedVersionError,
    celsius_to_centikelvin,
    decode_sequence,
    encode_sequence,
    format_vector,
    parse_vector,
    read_sequence,
    write_sequence,
)


def naive_encode(width, height, frames, fps, ambient):
    """Byte-by-byte encoder used as an independent reference."""
    out = bytearray(b"MTDF")
    out += bytes([1])
    out += width.to_bytes(2, "little") + height.to_bytes(2, "little")
    out += len(frames).to_bytes(4, "little") + fps.to_bytes(4, "little")
    out += ambient.to_bytes(2, "little") + bytes([0])
    for f in frames:
        for row in f:
            for v in row:
                out += int(v).to_bytes(2, "little")
    return bytes(out)


def random_sequence(rng, max_side=6, max_frames=5):
    w = int(rng.integers(1, max_side + 1))
    h = int(rng.integers(1, max_side + 1))
    n = int(rng.integers(1, max_frames + 1))
    arr = rng.integers(0, 65536, size=(n, h, w))
    fps = int(rng.integers(1, 2**32))
    amb = int(rng.integers(0, 65536))
    return FrameSequence.from_array(arr, fps, amb)


def test_single_pixel_layout():
    seq = FrameSequence.from_array([[[29500]]], 8000, 29615)
    buf = io.BytesIO()
    n = write_sequence(seq, buf)
    data = buf.getvalue()
    assert n == len(data) == 22
    assert data[:5] == b"MTDF\x01"
    assert struct.unpack("<HHIIHB", data[5:20]) == (1, 1, 1, 8000, 29615, 0)
    assert data[20:] == (29500).to_bytes(2, "little")


def test_empty_frame_list_rejected():
    with pytest.raises(DomainError, match="frame_count must be ≥ 1"):
        FrameSequence((), 8000, 29615)


def test_encoding_matches_naive_encoder():
    rng = np.random.default_rng(11)
    for _ in range(50):
        seq = random_sequence(rng)
        frames = [f.pixels.tolist() for f in seq.frames]
        assert encode_sequence(seq) == naive_encode(
            seq.width, seq.height, frames, seq.fps_millihz, seq.ambient_centikelvin)


def test_roundtrip_4x3x5():
    rng = np.random.default_rng(0)
    seq = FrameSequence.from_array(rng.integers(0, 65536, (5, 3, 4)), 8000, 29615)
    buf = io.BytesIO()
    write_sequence(seq, buf)
    buf.seek(0)
    back = read_sequence(buf)
    assert back == seq
    assert back.width == 4 and back.height == 3 and len(back) == 5


def test_roundtrip_1000_seeded_sequences():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        seq = random_sequence(rng)
        data = encode_sequence(seq)
        back = decode_sequence(data)
        assert back == seq
        assert encode_sequence(back) == data


def test_bad_magic():
    data = bytearray(encode_sequence(FrameSequence.from_array([[[1]]], 1, 1)))
    data[3] = ord("X")
    with pytest.raises(FormatError, match="magic"):
        decode_sequence(bytes(data))


def test_unsupported_version():
    data = bytearray(encode_sequence(FrameSequence.from_array([[[1]]], 1, 1)))
    data[4] = 2
    with pytest.raises(UnsupportedVersionError):
        decode_sequence(bytes(data))


def test_unknown_pixel_format_and_trailing_bytes():
    data = bytearray(encode_sequence(FrameSequence.from_array([[[1]]], 1, 1)))
    data[19] = 1
    with pytest.raises(FormatError, match="pixel_format"):
        decode_sequence(bytes(data))
    good = encode_sequence(FrameSequence.from_array([[[1]]], 1, 1))
    with pytest.raises(FormatError, match="trailing"):
        decode_sequence(good + b"\x00")


def test_zero_frame_count_and_fps_in_header_rejected():
    good = bytearray(encode_sequence(FrameSequence.from_array([[[1]]], 1, 1)))
    bad = bytearray(good)
    bad[9:13] = (0).to_bytes(4, "little")
    with pytest.raises(FormatError, match="frame_count"):
        decode_sequence(bytes(bad))
    bad = bytearray(good)
    bad[13:17] = (0).to_bytes(4, "little")
    with pytest.raises(FormatError, match="fps"):
        decode_sequence(bytes(bad))


def test_truncation_at_every_offset_is_a_clean_error():
    rng = np.random.default_rng(5)
    seq = FrameSequence.from_array(rng.integers(0, 65536, (3, 3, 4)), 6670, 29600)
    data = encode_sequence(seq)
    for cut in range(len(data)):
        with pytest.raises(FormatError) as info:
            decode_sequence(data[:cut])
        if cut >= 4:
            assert isinstance(info.value, TruncatedError)
            assert info.value.actual == cut
            assert info.value.expected in (20, len(data))


def test_truncated_payload_reports_offsets():
    seq = FrameSequence.from_array(np.ones((3, 2, 2)), 8000, 1)
    data = encode_sequence(seq)
    with pytest.raises(TruncatedError) as info:
        decode_sequence(data[:20 + 8 + 3])
    err = info.value
    assert err.offset == 28  # start of the incomplete second frame
    assert err.expected == 44 and err.actual == 31
    assert "expected 44" in str(err) and "got 31" in str(err)


class BrokenSink:
    def __init__(self, accept):
        self.accept = accept
        self.count = 0

    def write(self, b):
        if self.count >= self.accept:
            raise OSError("disk full")
        n = min(len(b), self.accept - self.count, 7)
        self.count += n
        return n


def test_sink_failure_reports_position():
    seq = FrameSequence.from_array(np.ones((2, 3, 3)), 8000, 1)
    with pytest.raises(SinkWriteError) as info:
        write_sequence(seq, BrokenSink(30))
    assert info.value.position == 30


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(1, 4), st.integers(0, 2**31))
def test_roundtrip_property(w, h, n, seed):
    rng = np.random.default_rng(seed)
    seq = FrameSequence.from_array(rng.integers(0, 65536, (n, h, w)), 1 + seed % 90000, seed % 65536)
    assert decode_sequence(encode_sequence(seq)) == seq


def test_frame_invariants():
    with pytest.raises(DomainError):
        RawFrame(2, 2, np.zeros(3, dtype=np.uint16), 0)
    with pytest.raises(DomainError):
        RawFrame(0, 1, np.zeros(0, dtype=np.uint16), 0)
    with pytest.raises(DomainError):
        RawFrame.from_array([[-1, 0]])
    with pytest.raises(DomainError):
        GrayFrame.from_array([[256]])
    with pytest.raises(DomainError):
        GrayFrame.from_array([[1.5]])
    f = RawFrame(2, 1, [300, 65535], 0)
    assert f.pixels.shape == (1, 2)
    with pytest.raises(ValueError):
        f.pixels[0, 0] = 1  # frames are read-only


def test_sequence_invariants():
    a = RawFrame.from_array([[1, 2]], 0)
    b = RawFrame.from_array([[1], [2]], 1)
    with pytest.raises(DomainError):
        FrameSequence((a, b), 8000, 1)
    with pytest.raises(DomainError):
        FrameSequence((a, RawFrame.from_array([[1, 2]], 2)), 8000, 1)
    with pytest.raises(DomainError):
        FrameSequence((a,), 0, 1)


def test_celsius_conversion():
    assert celsius_to_centikelvin(0.0) == 27315
    assert celsius_to_centikelvin(23.0) == 29615
    assert celsius_to_centikelvin(36.0) == 30915


def test_vector_invariants():
    DissipationVector([1.0, 0.5, 0.0, 0.0], 8000)
    with pytest.raises(DomainError):
        DissipationVector([1.0, 0.0, 0.5], 8000)
    with pytest.raises(DomainError):
        DissipationVector([1.2], 8000)
    with pytest.raises(DomainError):
        DissipationVector([1.0, -0.1], 8000)
    v = DissipationVector([1.0, 0.25, 0.0], 8000)
    assert np.array_equal(v.reduction_areas(), [0.0, 0.75, 1.0])
    assert v.resized(5).values.tolist() == [1.0, 0.25, 0.0, 0.0, 0.0]
    assert v.resized(2).values.tolist() == [1.0, 0.25]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=1, max_size=40),
       st.integers(1, 10**6))
def test_vector_text_roundtrip(vals, fps):
    vals = np.array(vals)
    zeros = np.flatnonzero(vals == 0)
    if zeros.size:
        vals[zeros[0]:] = 0.0
    v = DissipationVector(vals, fps)
    text = format_vector(v)
    assert text.splitlines()[0] == f"MDV1 {len(vals)} {fps}"
    assert parse_vector(text) == v


def test_vector_text_errors():
    with pytest.raises(FormatError):
        parse_vector("")
    with pytest.raises(FormatError):
        parse_vector("MDV2 1 8000\n1.0\n")
    with pytest.raises(FormatError):
        parse_vector("MDV1 3 8000\n1.0\n0.5\n")
    with pytest.raises(FormatError):
        parse_vector("MDV1 2 8000\n1.0\nabc\n")
    with pytest.raises(FormatError):
        parse_vector("MDV1 3 8000\n1.0\n0.0\n0.5\n")
