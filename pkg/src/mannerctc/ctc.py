"""CTC alignment semantics: path collapsing, forward probability, brute force.

All functions work on label indices with the blank at index 0.
"""

from __future__ import annotations

import itertools
from collections import defaultdict

import numpy as np

from .exceptions import InstanceTooLargeError
from .validation import check_posteriors

BLANK = 0

#: Upper bound on ``L**T`` accepted by the enumeration oracle.
MAX_ENUMERATED_PATHS = 10**7


def squash(path, blank: int = BLANK) -> tuple[int, ...]:
    """Collapse repeated labels, then drop blanks: ``[0,0,1,1,0,2] -> (1, 2)``."""
    out = []
    prev = None
    for lab in path:
        lab = int(lab)
        if lab != prev and lab != blank:
            out.append(lab)
        prev = lab
    return tuple(out)


def min_frames(y) -> int:
    """Shortest path length that can emit ``y`` (repeats need a blank between)."""
    y = list(y)
    return len(y) + sum(1 for a, b in zip(y, y[1:]) if a == b)


def _log(probs: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(probs)


def forward_log_probability(probs, y, blank: int = BLANK) -> float:
    """``log p(y | X)`` by the CTC forward recursion, in log space.

    ``-inf`` when ``y`` cannot be emitted in the available frames.
    """
    probs = check_posteriors(probs)
    y = tuple(int(c) for c in y)
    T, L = probs.shape
    if any(c == blank or not 0 <= c < L for c in y):
        raise ValueError(f"transcript labels must be non-blank indices below {L}")
    if min_frames(y) > T:
        return float("-inf")

    logp = _log(probs)
    ext = np.full(2 * len(y) + 1, blank, dtype=np.intp)
    ext[1::2] = y
    S = ext.size
    # s-2 -> s skip is allowed into a label that differs from the previous label
    skip = np.zeros(S, dtype=bool)
    if S > 3:
        skip[3::2] = ext[3::2] != ext[1:-2:2]

    alpha = np.full(S, -np.inf)
    alpha[0] = logp[0, ext[0]]
    if S > 1:
        alpha[1] = logp[0, ext[1]]
    for t in range(1, T):
        prev = alpha
        acc = prev.copy()
        np.logaddexp(acc[1:], prev[:-1], out=acc[1:])
        if S > 3:
            np.logaddexp(acc[2:], np.where(skip[2:], prev[:-2], -np.inf), out=acc[2:])
        alpha = acc + logp[t, ext]
    tail = alpha[-1] if S == 1 else np.logaddexp(alpha[-1], alpha[-2])
    return float(tail)


def forward_probability(probs, y, blank: int = BLANK) -> float:
    """Sum over all alignments of ``y`` of the product of frame posteriors."""
    return float(np.exp(forward_log_probability(probs, y, blank)))


def _check_enumerable(T: int, L: int) -> None:
    if L**T > MAX_ENUMERATED_PATHS:
        raise InstanceTooLargeError(
            f"refusing to enumerate {L}**{T} paths; the bound is {MAX_ENUMERATED_PATHS:.0e}"
        )


def iter_paths(T: int, L: int):
    return itertools.product(range(L), repeat=T)


def transcript_distribution(probs, blank: int = BLANK) -> dict[tuple[int, ...], float]:
    """Exhaustive map transcript -> probability, over all ``L**T`` paths."""
    probs = check_posteriors(probs)
    T, L = probs.shape
    _check_enumerable(T, L)
    paths = np.array(list(iter_paths(T, L)), dtype=np.intp).reshape(-1, T)
    weights = probs[np.arange(T), paths].prod(axis=1)
    dist: dict[tuple[int, ...], float] = defaultdict(float)
    for path, w in zip(paths.tolist(), weights.tolist()):
        dist[squash(path, blank)] += w
    return dict(dist)


def enumerate_oracle(probs, y, blank: int = BLANK) -> float:
    """Brute-force ``p(y | X)``: sum the weights of every path squashing to ``y``."""
    probs = check_posteriors(probs)
    T, L = probs.shape
    _check_enumerable(T, L)
    y = tuple(int(c) for c in y)
    total = 0.0
    for path in iter_paths(T, L):
        if squash(path, blank) == y:
            w = 1.0
            for t, lab in enumerate(path):
                w *= probs[t, lab]
            total += w
    return total
