"""Best-path and prefix beam search decoding of CTC posteriors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .alphabet import Alphabet
from .ctc import BLANK, squash
from .validation import check_beam_width, check_posteriors, check_probability

NEG_INF = float("-inf")
DEFAULT_BEAM_WIDTH = 100


@dataclass(frozen=True)
class BeamParams:
    """Beam search settings.

    ``width=None`` disables pruning by width (every prefix is kept).
    Emitting extensions whose frame posterior is below ``prune_threshold``
    are not explored; exact zeros never are.
    """

    width: int | None = DEFAULT_BEAM_WIDTH
    prune_threshold: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "width", check_beam_width(self.width))
        object.__setattr__(
            self, "prune_threshold",
            check_probability(self.prune_threshold, "prune_threshold", closed=False),
        )


@dataclass(frozen=True)
class DecodeResult:
    transcript: str
    labels: tuple[int, ...]
    score: float
    per_frame_argmax: tuple[int, ...]
    path: tuple[int, ...] | None = None
    nbest: tuple[tuple[tuple[int, ...], float], ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        out = {
            "transcript": self.transcript,
            "labels": list(self.labels),
            "score": self.score if math.isfinite(self.score) else None,
        }
        if self.path is not None:
            out["path"] = list(self.path)
        return out


def _logaddexp(a: float, b: float) -> float:
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a >= b:
        return a + math.log1p(math.exp(b - a))
    return b + math.log1p(math.exp(a - b))


def _log(probs):
    with np.errstate(divide="ignore"):
        return np.log(probs)


def _n_labels(alphabet: Alphabet | None) -> int | None:
    return None if alphabet is None else len(alphabet)


def _transcript(alphabet: Alphabet | None, labels) -> str:
    if alphabet is None:
        return " ".join(str(i) for i in labels)
    return alphabet.decode(labels)


def greedy_decode(probs, alphabet: Alphabet | None = None) -> DecodeResult:
    """Best path: per-frame argmax (lowest index wins ties), then squash."""
    probs = check_posteriors(probs, _n_labels(alphabet))
    path = np.argmax(probs, axis=1)
    score = float(np.sum(_log(probs[np.arange(len(path)), path])))
    path_t = tuple(int(i) for i in path)
    labels = squash(path_t, BLANK)
    return DecodeResult(
        transcript=_transcript(alphabet, labels),
        labels=labels,
        score=score,
        per_frame_argmax=path_t,
        path=path_t,
    )


def _rank(beams: dict, width: int | None):
    ranked = []
    for prefix, (pb, pnb) in beams.items():
        total = _logaddexp(pb, pnb)
        if total != NEG_INF:
            ranked.append((-total, prefix, pb, pnb))
    # equal scores: lexicographically smallest prefix first
    ranked.sort()
    if width is not None:
        del ranked[width:]
    return ranked


def prefix_beam_steps(probs, params: BeamParams = BeamParams(), blank: int = BLANK):
    """Run prefix beam search, yielding the surviving beam after every frame.

    Each yielded item is a list of ``(prefix, log_p_blank, log_p_nonblank)``
    sorted best first. ``log_p_blank`` is the log probability of all kept
    paths that produce ``prefix`` and end in a blank at this frame.
    """
    probs = check_posteriors(probs)
    logp = _log(probs)
    width, prune = params.width, params.prune_threshold
    beam = [((), 0.0, NEG_INF)]
    for t in range(probs.shape[0]):
        row = probs[t]
        lp = logp[t].tolist()
        emit = row > prune
        emit[blank] = False
        emit &= row > 0.0
        cands = np.flatnonzero(emit).tolist()
        lp_blank = lp[blank]

        nxt: dict[tuple[int, ...], list[float]] = {}
        for prefix, pb, pnb in beam:
            total = _logaddexp(pb, pnb)
            cell = nxt.get(prefix)
            if cell is None:
                cell = nxt[prefix] = [NEG_INF, NEG_INF]
            if lp_blank != NEG_INF:
                cell[0] = _logaddexp(cell[0], total + lp_blank)
            last = prefix[-1] if prefix else None
            if last is not None and lp[last] != NEG_INF and pnb != NEG_INF:
                cell[1] = _logaddexp(cell[1], pnb + lp[last])
            for c in cands:
                # a repeated label only opens a new symbol after a blank
                val = (pb if c == last else total) + lp[c]
                if val == NEG_INF:
                    continue
                ext = prefix + (c,)
                ecell = nxt.get(ext)
                if ecell is None:
                    nxt[ext] = [NEG_INF, val]
                else:
                    ecell[1] = _logaddexp(ecell[1], val)
        ranked = _rank(nxt, width)
        beam = [(prefix, pb, pnb) for _, prefix, pb, pnb in ranked]
        yield beam


def beam_search_decode(probs, alphabet: Alphabet | None = None,
                       params: BeamParams = BeamParams(), nbest: int = 0) -> DecodeResult:
    """CTC prefix beam search; returns the best prefix and its log probability.

    Prefixes are merged across paths and carry separate blank-ending and
    non-blank-ending mass. No language model is involved.
    """
    probs = check_posteriors(probs, _n_labels(alphabet))
    beam = [((), 0.0, NEG_INF)]
    for beam in prefix_beam_steps(probs, params):
        pass
    if beam:
        best, pb, pnb = beam[0]
        score = _logaddexp(pb, pnb)
    else:
        best, score = (), NEG_INF
    argmax = tuple(int(i) for i in np.argmax(probs, axis=1))
    top = tuple((prefix, _logaddexp(pb, pnb)) for prefix, pb, pnb in beam[:nbest])
    return DecodeResult(
        transcript=_transcript(alphabet, best),
        labels=best,
        score=score,
        per_frame_argmax=argmax,
        nbest=top,
    )


def decode(probs, alphabet: Alphabet | None = None, params: BeamParams | None = None) -> DecodeResult:
    """Greedy decoding when ``params`` is None, beam search otherwise."""
    if params is None:
        return greedy_decode(probs, alphabet)
    return beam_search_decode(probs, alphabet, params)
