"""Posterior matrices and their on-disk formats.

Binary layout (little endian)::

    b"CTCP"  u8 version  u32 T  u32 L  T*L float32 (row major)

Text layout::

    labels: - A B C ...
    0.9 0.05 0.05 ...
    ...

one line per frame. Rows off by at most 1e-6 are renormalized on load; larger
deviations are rejected.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .alphabet import Alphabet
from .exceptions import PosteriorError
from .validation import ROW_SUM_TOL, check_posteriors

MAGIC = b"CTCP"
VERSION = 1
_HEADER = struct.Struct("<4sBII")
FORMATS = ("bin", "text")

# float32 storage moves a normalized row's sum by ~2**-24; only renormalize
# beyond that so binary save/load stays exact.
_RENORM_FLOOR = 2.0**-22


@dataclass(frozen=True, eq=False)
class PosteriorMatrix:
    """Validated, read-only ``(T, L)`` matrix of per-frame label posteriors.

    ``labels`` names the columns (the alphabet the matrix was produced for);
    it may be ``None`` when the source format does not carry label names.
    """

    frames: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        n = None if self.labels is None else len(self.labels)
        arr = np.array(check_posteriors(self.frames, n), dtype=np.float64, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "frames", arr)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))

    @classmethod
    def for_alphabet(cls, frames, alphabet: Alphabet) -> "PosteriorMatrix":
        return cls(frames, alphabet.labels)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_labels(self) -> int:
        return self.frames.shape[1]

    @property
    def shape(self):
        return self.frames.shape

    def __array__(self, dtype=None, copy=None):
        return self.frames if dtype is None else self.frames.astype(dtype)

    def __len__(self):
        return self.n_frames

    def __eq__(self, other):
        if not isinstance(other, PosteriorMatrix):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.frames, other.frames)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate`. ``row_errors`` holds ``row_sum - 1`` per frame."""

    ok: bool
    row_errors: np.ndarray
    failing_rows: tuple[int, ...]
    max_error: float
    messages: tuple[str, ...] = ()

    def deficit(self, row: int) -> float:
        """How much mass row ``row`` is missing (negative when it has too much)."""
        return float(-self.row_errors[row])


def validate(p, tol: float = ROW_SUM_TOL) -> ValidationReport:
    """Check a posterior matrix without raising; all problems go in the report."""
    arr = np.asarray(getattr(p, "frames", p), dtype=np.float64)
    messages = []
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 2:
        messages.append(f"expected a (T>=1, L>=2) matrix, got shape {arr.shape}")
        return ValidationReport(False, np.zeros(0), (), float("inf"), tuple(messages))
    finite = np.isfinite(arr)
    if not finite.all():
        messages.append(f"{int((~finite).sum())} non-finite entries")
    if (arr[finite] < 0).any():
        messages.append("negative entries")
    with np.errstate(invalid="ignore"):
        errors = arr.sum(axis=1) - 1.0
    bad_rows = ~(np.abs(errors) <= tol)
    bad_rows |= ~finite.all(axis=1)
    bad_rows |= (np.where(finite, arr, 0.0) < 0).any(axis=1)
    failing = tuple(int(i) for i in np.flatnonzero(bad_rows))
    for t in failing[:10]:
        messages.append(f"row {t}: sum error {errors[t]:+.3g}")
    abs_err = np.abs(errors)
    max_error = float(np.max(abs_err)) if np.isfinite(abs_err).all() else float("inf")
    errors.setflags(write=False)
    return ValidationReport(not failing and not messages, errors, failing, max_error, tuple(messages))


def _coerce_loaded(arr: np.ndarray, labels, source: str) -> PosteriorMatrix:
    if not np.all(np.isfinite(arr)):
        raise PosteriorError(f"{source}: non-finite values")
    if np.any(arr < 0):
        raise PosteriorError(f"{source}: negative values")
    arr = arr.astype(np.float64)
    sums = arr.sum(axis=1)
    err = np.abs(sums - 1.0)
    bad = np.flatnonzero(err > ROW_SUM_TOL)
    if bad.size:
        raise PosteriorError(
            f"{source}: row {int(bad[0])} sums to {sums[bad[0]]:.9g}; "
            f"exceeds normalization tolerance {ROW_SUM_TOL:g}"
        )
    fix = err > _RENORM_FLOOR
    if fix.any():
        arr[fix] /= sums[fix, None]
    return PosteriorMatrix(arr, labels)


def to_bytes(p: PosteriorMatrix) -> bytes:
    arr = np.ascontiguousarray(np.asarray(p.frames), dtype="<f4")
    T, L = arr.shape
    return _HEADER.pack(MAGIC, VERSION, T, L) + arr.tobytes()


def from_bytes(data: bytes, alphabet: Alphabet | None = None, source: str = "<bytes>") -> PosteriorMatrix:
    if len(data) < _HEADER.size:
        raise PosteriorError(f"{source}: truncated header")
    magic, version, T, L = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise PosteriorError(f"{source}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise PosteriorError(f"{source}: unsupported version {version}")
    if alphabet is not None and L != len(alphabet):
        raise PosteriorError(f"{source}: file has L={L} labels but the alphabet has {len(alphabet)}")
    expected = _HEADER.size + 4 * T * L
    if len(data) != expected:
        raise PosteriorError(f"{source}: expected {expected} bytes for T={T}, L={L}, got {len(data)}")
    if T < 1 or L < 2:
        raise PosteriorError(f"{source}: invalid dimensions T={T}, L={L}")
    arr = np.frombuffer(data, dtype="<f4", offset=_HEADER.size).reshape(T, L)
    labels = alphabet.labels if alphabet is not None else None
    return _coerce_loaded(arr, labels, source)


def to_text(p: PosteriorMatrix, labels: tuple[str, ...] | None = None) -> str:
    labels = labels or p.labels
    if labels is None:
        raise PosteriorError("text format needs label names; pass an alphabet")
    lines = ["labels: " + " ".join(labels)]
    lines.extend(" ".join(repr(float(v)) for v in row) for row in p.frames)
    return "\n".join(lines) + "\n"


def from_text(text: str, alphabet: Alphabet | None = None, source: str = "<text>") -> PosteriorMatrix:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("labels:"):
        raise PosteriorError(f"{source}: malformed header; first line must be 'labels: <symbols>'")
    labels = tuple(lines[0][len("labels:"):].split())
    if alphabet is not None:
        if len(labels) != len(alphabet):
            raise PosteriorError(
                f"{source}: header lists {len(labels)} labels but the alphabet has {len(alphabet)}"
            )
        if labels != alphabet.labels:
            raise PosteriorError(f"{source}: header labels differ from the alphabet ordering")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != len(labels):
            raise PosteriorError(
                f"{source}: line {lineno} has {len(fields)} fields, expected {len(labels)}"
            )
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise PosteriorError(f"{source}: line {lineno}: {exc}") from None
    if not rows:
        raise PosteriorError(f"{source}: no frames")
    if len(labels) < 2:
        raise PosteriorError(f"{source}: need at least 2 labels")
    return _coerce_loaded(np.array(rows, dtype=np.float64), labels, source)


def detect_format(path: str | os.PathLike) -> str:
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
    return "bin" if head == MAGIC else "text"


def save(p: PosteriorMatrix, path: str | os.PathLike, format: str = "bin",
         alphabet: Alphabet | None = None) -> None:
    if format == "bin":
        with open(path, "wb") as fh:
            fh.write(to_bytes(p))
    elif format == "text":
        labels = alphabet.labels if alphabet is not None else None
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(to_text(p, labels))
    else:
        raise ValueError(f"unknown posterior format {format!r}; choose from {FORMATS}")


def load(path: str | os.PathLike, format: str | None = None,
         alphabet: Alphabet | None = None) -> PosteriorMatrix:
    """Read a posterior file. ``format=None`` sniffs the magic bytes."""
    fmt = format or detect_format(path)
    source = os.fspath(path)
    if fmt == "bin":
        with open(path, "rb") as fh:
            return from_bytes(fh.read(), alphabet, source)
    if fmt == "text":
        with open(path, encoding="utf-8") as fh:
            return from_text(fh.read(), alphabet, source)
    raise ValueError(f"unknown posterior format {fmt!r}; choose from {FORMATS}")
