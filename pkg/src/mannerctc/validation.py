"""Input validation helpers in the spirit of ``sklearn.utils.check_array``."""

from __future__ import annotations

import numpy as np

from .exceptions import PosteriorError

#: Maximum allowed |row sum - 1| for a posterior matrix.
ROW_SUM_TOL = 1e-6


def check_posteriors(X, n_labels: int | None = None, *, name: str = "posteriors",
                     tol: float = ROW_SUM_TOL) -> np.ndarray:
    """Validate a ``(T, L)`` posterior matrix and return it as float64.

    Accepts arrays, nested lists or :class:`~mannerctc.posterior.PosteriorMatrix`.
    Raises :class:`PosteriorError` on shape problems, non-finite or negative
    entries, or rows that do not sum to one within ``tol``.
    """
    frames = getattr(X, "frames", X)
    arr = np.asarray(frames, dtype=np.float64)
    if arr.ndim != 2:
        raise PosteriorError(f"{name} must be 2-D (frames x labels), got shape {arr.shape}")
    T, L = arr.shape
    if T < 1:
        raise PosteriorError(f"{name} has no frames")
    if L < 2:
        raise PosteriorError(f"{name} needs at least 2 labels (blank + one), got {L}")
    if n_labels is not None and L != n_labels:
        raise PosteriorError(f"{name} has {L} labels but the alphabet has {n_labels}")
    if not np.all(np.isfinite(arr)):
        raise PosteriorError(f"{name} contains non-finite values")
    if np.any(arr < 0):
        raise PosteriorError(f"{name} contains negative values")
    err = np.abs(arr.sum(axis=1) - 1.0)
    bad = np.flatnonzero(err > tol)
    if bad.size:
        t = int(bad[0])
        raise PosteriorError(
            f"{name} row {t} sums to {arr[t].sum():.9g} (tolerance {tol:g}); "
            f"{bad.size} row(s) not normalized"
        )
    return arr


def check_frame_sync(char_posteriors: np.ndarray, manner_posteriors: np.ndarray) -> None:
    tc, tm = len(char_posteriors), len(manner_posteriors)
    if tc != tm:
        raise PosteriorError(
            f"frame count mismatch: character stream has {tc} frames, manner stream has {tm}"
        )


def check_beam_width(width) -> int | None:
    if width is None:
        return None
    if isinstance(width, bool) or not isinstance(width, (int, np.integer)) or width < 1:
        raise ValueError(f"beam width must be a positive integer or None, got {width!r}")
    return int(width)


def check_probability(value, name: str, *, closed: bool = True) -> float:
    value = float(value)
    upper_ok = value <= 1.0 if closed else value < 1.0
    if not (value >= 0.0 and upper_ok):
        interval = "[0, 1]" if closed else "[0, 1)"
        raise ValueError(f"{name} must lie in {interval}, got {value!r}")
    return value
