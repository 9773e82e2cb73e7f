"""Domain types and on-disk formats.

Frames carry absolute temperatures in centikelvin (uint16) so that the
binary container is bit-exact. Normalized frames carry uint8 intensities.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO, Optional, Sequence, TextIO

import numpy as np

MAGIC = b"MTDF"
VERSION = 1
PIXEL_FORMAT_CENTIKELVIN = 0
# magic, version, width, height, frame_count, fps_millihz, ambient, pixel_format
_HEADER = struct.Struct("<4sBHHIIHB")
HEADER_SIZE = _HEADER.size  # 20

KELVIN_OFFSET = 273.15


class ThermprintError(Exception):
    """Base class for all domain errors raised by this package."""


class DomainError(ThermprintError, ValueError):
    pass


class ConfigError(DomainError):
    pass


class NoFingerprintError(DomainError):
    pass


class FormatError(ThermprintError, ValueError):
    pass


class UnsupportedVersionError(FormatError):
    pass


class TruncatedError(FormatError):
    def __init__(self, what: str, offset: int, expected: int, actual: int):
        self.offset = offset
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"truncated {what} at byte offset {offset}: "
            f"expected {expected} bytes, got {actual}"
        )


class SinkWriteError(ThermprintError, OSError):
    def __init__(self, position: int, cause: BaseException):
        self.position = position
        super().__init__(f"write failed at byte {position}: {cause}")


def celsius_to_centikelvin(t_c: float) -> int:
    return int(round((t_c + KELVIN_OFFSET) * 100.0))


def centikelvin_to_celsius(t_ck) -> float:
    return np.asarray(t_ck, dtype=float) / 100.0 - KELVIN_OFFSET


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _as_grid(pixels, width: int, height: int, dtype, lo: int, hi: int, what: str):
    if width < 1 or height < 1:
        raise DomainError(f"{what}: width and height must be >= 1, got {width}x{height}")
    src = np.asarray(pixels)
    if src.size != width * height:
        raise DomainError(
            f"{what}: pixel count {src.size} != width*height {width * height}"
        )
    if src.size and (src.min() < lo or src.max() > hi):
        raise DomainError(f"{what}: pixel values outside [{lo}, {hi}]")
    if src.dtype.kind == "f" and not np.all(src == np.round(src)):
        raise DomainError(f"{what}: pixel values must be integers")
    return _frozen(np.array(src, dtype=dtype).reshape(height, width))


@dataclass(frozen=True, eq=False)
class RawFrame:
    """One thermal image; ``pixels`` has shape (height, width), uint16 centikelvin."""

    width: int
    height: int
    pixels: np.ndarray
    index: int = 0

    def __post_init__(self):
        if self.index < 0:
            raise DomainError(f"frame index must be >= 0, got {self.index}")
        object.__setattr__(
            self,
            "pixels",
            _as_grid(self.pixels, self.width, self.height, np.uint16, 0, 65535, "RawFrame"),
        )

    @classmethod
    def from_array(cls, arr, index: int = 0) -> "RawFrame":
        arr = np.asarray(arr)
        return cls(arr.shape[1], arr.shape[0], arr, index)

    @classmethod
    def _trusted(cls, arr: np.ndarray, index: int) -> "RawFrame":
        # arr already validated as a read-only uint16 (h, w) view
        obj = object.__new__(cls)
        for k, v in (("width", arr.shape[1]), ("height", arr.shape[0]),
                     ("pixels", arr), ("index", index)):
            object.__setattr__(obj, k, v)
        return obj

    def __eq__(self, other):
        if not isinstance(other, RawFrame):
            return NotImplemented
        return (
            self.index == other.index
            and self.pixels.shape == other.pixels.shape
            and bool(np.array_equal(self.pixels, other.pixels))
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GrayFrame:
    """Normalized 8-bit frame, ``pixels`` shape (height, width)."""

    width: int
    height: int
    pixels: np.ndarray
    index: int = 0

    def __post_init__(self):
        if self.index < 0:
            raise DomainError(f"frame index must be >= 0, got {self.index}")
        object.__setattr__(
            self,
            "pixels",
            _as_grid(self.pixels, self.width, self.height, np.uint8, 0, 255, "GrayFrame"),
        )

    @classmethod
    def from_array(cls, arr, index: int = 0) -> "GrayFrame":
        arr = np.asarray(arr)
        return cls(arr.shape[1], arr.shape[0], arr, index)

    @classmethod
    def _trusted(cls, arr: np.ndarray, index: int) -> "GrayFrame":
        obj = object.__new__(cls)
        for k, v in (("width", arr.shape[1]), ("height", arr.shape[0]),
                     ("pixels", arr), ("index", index)):
            object.__setattr__(obj, k, v)
        return obj

    def __eq__(self, other):
        if not isinstance(other, GrayFrame):
            return NotImplemented
        return (
            self.index == other.index
            and self.pixels.shape == other.pixels.shape
            and bool(np.array_equal(self.pixels, other.pixels))
        )

    __hash__ = None


def stack_frames(frames: Sequence) -> np.ndarray:
    """Stack RawFrame/GrayFrame pixels into a (n, height, width) array."""
    if not frames:
        raise DomainError("no frames to stack")
    return np.stack([f.pixels for f in frames])


@dataclass(frozen=True, eq=False)
class FrameSequence:
    """Ordered thermal frames plus capture metadata.

    ``label`` is an in-memory annotation only; the MTDF container does not
    store it.
    """

    frames: tuple
    fps_millihz: int
    ambient_centikelvin: int
    label: Optional[str] = None

    def __post_init__(self):
        frames = tuple(self.frames)
        object.__setattr__(self, "frames", frames)
        if not frames:
            raise DomainError("frame_count must be ≥ 1")
        if self.fps_millihz <= 0:
            raise DomainError(f"fps_millihz must be > 0, got {self.fps_millihz}")
        if not 0 <= self.ambient_centikelvin <= 65535:
            raise DomainError("ambient_centikelvin outside uint16 range")
        w, h = frames[0].width, frames[0].height
        for i, f in enumerate(frames):
            if not isinstance(f, RawFrame):
                raise DomainError(f"frame {i} is not a RawFrame")
            if (f.width, f.height) != (w, h):
                raise DomainError(
                    f"frame {i} is {f.width}x{f.height}, expected {w}x{h}"
                )
            if f.index != i:
                raise DomainError(f"frame {i} has index {f.index}; indices must run 0..n-1")

    @classmethod
    def from_array(cls, arr, fps_millihz: int, ambient_centikelvin: int,
                   label: Optional[str] = None) -> "FrameSequence":
        arr = np.asarray(arr)
        if arr.ndim != 3 or 0 in arr.shape:
            raise DomainError("expected a non-empty (frames, height, width) array")
        if arr.dtype != np.uint16:
            if arr.min() < 0 or arr.max() > 65535 or (
                    arr.dtype.kind == "f" and not np.all(arr == np.round(arr))):
                raise DomainError("pixel values must be integers in [0, 65535]")
        stack = _frozen(np.array(arr, dtype=np.uint16))
        frames = tuple(RawFrame._trusted(a, i) for i, a in enumerate(stack))
        return cls(frames, int(fps_millihz), int(ambient_centikelvin), label)

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def fps(self) -> float:
        return self.fps_millihz / 1000.0

    def __len__(self) -> int:
        return len(self.frames)

    def stack(self) -> np.ndarray:
        return stack_frames(self.frames)

    def __eq__(self, other):
        if not isinstance(other, FrameSequence):
            return NotImplemented
        return (
            self.fps_millihz == other.fps_millihz
            and self.ambient_centikelvin == other.ambient_centikelvin
            and self.label == other.label
            and len(self.frames) == len(other.frames)
            and all(a == b for a, b in zip(self.frames, other.frames))
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class DissipationVector:
    """Remaining hot-area fraction per frame, zero padded to a fixed length.

    Element ``t`` is ``A_t / A_i``; the reduction area of the frame is
    ``1 - values[t]``.
    """

    values: np.ndarray
    fps_millihz: int

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size < 1:
            raise DomainError("vector must have at least one element")
        if not np.all(np.isfinite(v)) or v.min() < 0.0 or v.max() > 1.0:
            raise DomainError("vector elements must lie in [0, 1]")
        zeros = np.flatnonzero(v == 0.0)
        if zeros.size and np.any(v[zeros[0]:] != 0.0):
            raise DomainError("vector violates zero tail: non-zero after first 0")
        if self.fps_millihz <= 0:
            raise DomainError(f"fps_millihz must be > 0, got {self.fps_millihz}")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def length_l(self) -> int:
        return int(self.values.size)

    def reduction_areas(self) -> np.ndarray:
        return 1.0 - self.values

    def resized(self, length: int) -> "DissipationVector":
        """Truncate to the first ``length`` samples or zero pad up to it."""
        if length < 1:
            raise DomainError("length must be >= 1")
        out = np.zeros(length)
        n = min(length, self.values.size)
        out[:n] = self.values[:n]
        return DissipationVector(out, self.fps_millihz)

    def __eq__(self, other):
        if not isinstance(other, DissipationVector):
            return NotImplemented
        return self.fps_millihz == other.fps_millihz and bool(
            np.array_equal(self.values, other.values)
        )

    def __len__(self):
        return self.length_l

    __hash__ = None


# --- MTDF binary container ---------------------------------------------------


def encode_sequence(seq: FrameSequence) -> bytes:
    header = _HEADER.pack(
        MAGIC, VERSION, seq.width, seq.height, len(seq.frames),
        seq.fps_millihz, seq.ambient_centikelvin, PIXEL_FORMAT_CENTIKELVIN,
    )
    payload = seq.stack().astype("<u2", copy=False).tobytes(order="C")
    return header + payload


def write_sequence(seq: FrameSequence, sink: BinaryIO) -> int:
    """Write ``seq`` as an MTDF v1 container; returns the number of bytes written."""
    if not isinstance(seq, FrameSequence):
        raise DomainError("write_sequence expects a FrameSequence")
    data = encode_sequence(seq)
    written = 0
    view = memoryview(data)
    while written < len(data):
        try:
            n = sink.write(view[written:])
        except OSError as exc:
            raise SinkWriteError(written, exc) from exc
        if n is None:  # unbuffered raw streams may report None
            n = len(data) - written
        if n <= 0:
            raise SinkWriteError(written, OSError("sink accepted no bytes"))
        written += n
    return written


def decode_sequence(data: bytes) -> FrameSequence:
    if len(data) < 4:
        raise TruncatedError("header", 0, HEADER_SIZE, len(data))
    if data[:4] != MAGIC:
        raise FormatError(f"bad magic {bytes(data[:4])!r}, expected {MAGIC!r}")
    if len(data) >= 5 and data[4] != VERSION:
        raise UnsupportedVersionError(f"unsupported MTDF version {data[4]}")
    if len(data) < HEADER_SIZE:
        raise TruncatedError("header", 0, HEADER_SIZE, len(data))
    _, _, width, height, count, fps, ambient, pixfmt = _HEADER.unpack_from(data)
    if pixfmt != PIXEL_FORMAT_CENTIKELVIN:
        raise FormatError(f"unknown pixel_format {pixfmt}")
    if width < 1 or height < 1:
        raise FormatError(f"invalid frame size {width}x{height}")
    if count < 1:
        raise FormatError("frame_count must be ≥ 1")
    if fps == 0:
        raise FormatError("fps_millihz must be > 0")
    frame_bytes = 2 * width * height
    expected = frame_bytes * count
    body = data[HEADER_SIZE:]
    if len(body) < expected:
        done = len(body) // frame_bytes
        raise TruncatedError(
            f"payload (frame {done} of {count})", HEADER_SIZE + done * frame_bytes,
            HEADER_SIZE + expected, len(data),
        )
    if len(body) > expected:
        raise FormatError(
            f"{len(body) - expected} trailing bytes after the last frame"
        )
    arr = np.frombuffer(body, dtype="<u2").reshape(count, height, width)
    try:
        return FrameSequence.from_array(arr.astype(np.uint16), fps, ambient)
    except DomainError as exc:
        raise FormatError(str(exc)) from exc


def read_sequence(source: BinaryIO) -> FrameSequence:
    """Parse an MTDF v1 container from a binary stream."""
    return decode_sequence(source.read())


def save_sequence(seq: FrameSequence, path) -> int:
    with open(path, "wb") as fh:
        return write_sequence(seq, fh)


def load_sequence(path) -> FrameSequence:
    with open(path, "rb") as fh:
        return read_sequence(fh)


# --- MDV1 text vectors -------------------------------------------------------


def format_vector(vec: DissipationVector) -> str:
    lines = [f"MDV1 {vec.length_l} {vec.fps_millihz}"]
    lines.extend(repr(float(x)) for x in vec.values)
    return "\n".join(lines) + "\n"


def parse_vector(text: str) -> DissipationVector:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty MDV1 document")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "MDV1":
        raise FormatError(f"bad MDV1 header line: {lines[0]!r}")
    try:
        length, fps = int(head[1]), int(head[2])
        values = [float(x) for x in lines[1:]]
    except ValueError as exc:
        raise FormatError(f"malformed MDV1 document: {exc}") from exc
    if len(values) != length:
        raise FormatError(f"MDV1 header declares {length} values, found {len(values)}")
    try:
        return DissipationVector(np.array(values), fps)
    except DomainError as exc:
        raise FormatError(str(exc)) from exc


def write_vector(vec: DissipationVector, sink: TextIO) -> None:
    sink.write(format_vector(vec))


def read_vector(source: TextIO) -> DissipationVector:
    return parse_vector(source.read())


def save_vector(vec: DissipationVector, path) -> None:
    with open(path, "w") as fh:
        write_vector(vec, fh)


def load_vector(path) -> DissipationVector:
    with open(path) as fh:
        return read_vector(fh)
