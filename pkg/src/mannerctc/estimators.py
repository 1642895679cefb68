"""scikit-learn compatible wrappers.

``X`` is always a sequence of utterances. For :class:`CTCDecoder` each item
is a ``(T, L)`` character posterior matrix; for :class:`MannerMasker` and
:class:`MannerConstrainedDecoder` each item is a ``(char, manner)`` pair of
frame-synchronous matrices. Because the masker's output is a list of
character matrices, ``make_pipeline(MannerMasker(), CTCDecoder())`` is the
same decoder as :class:`MannerConstrainedDecoder`.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .alphabet import Alphabet, MannerMap, default_alphabet, default_manner_map
from .decode import DEFAULT_BEAM_WIDTH, BeamParams, DecodeResult, beam_search_decode, greedy_decode
from .mask import mask_posteriors, plan_from_manner_posteriors
from .metrics import edit_distance, error_rate, normalize_text
from .validation import check_frame_sync, check_posteriors


def _check_is_fitted(est, attr):
    if not hasattr(est, attr):
        raise NotFittedError(
            f"This {type(est).__name__} instance is not fitted yet. Call 'fit' first."
        )


def _check_pairs(X, manner_map: MannerMap):
    out = []
    for i, item in enumerate(X):
        try:
            pc, pm = item
        except (TypeError, ValueError):
            raise ValueError(f"utterance {i}: expected a (char_posteriors, manner_posteriors) pair") from None
        pc = check_posteriors(pc, len(manner_map.chars), name=f"utterance {i} character posteriors")
        pm = check_posteriors(pm, len(manner_map.manners), name=f"utterance {i} manner posteriors")
        check_frame_sync(pc, pm)
        out.append((pc, pm))
    return out


class CTCDecoder(BaseEstimator):
    """Decode character posteriors to transcripts.

    Parameters
    ----------
    method : {"beam", "greedy"}
    beam_width : int or None
        Number of prefixes kept per frame; None keeps all of them.
    prune_threshold : float
        Emitting labels below this frame posterior are not explored.
    alphabet : Alphabet, optional
        Defaults to the 28-label character alphabet.

    ``fit`` learns nothing; it resolves and checks the alphabet.
    """

    def __init__(self, method="beam", beam_width=DEFAULT_BEAM_WIDTH, prune_threshold=0.0,
                 alphabet=None):
        self.method = method
        self.beam_width = beam_width
        self.prune_threshold = prune_threshold
        self.alphabet = alphabet

    def _resolve_alphabet(self, X):
        alphabet = self.alphabet if self.alphabet is not None else default_alphabet()
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(tuple(alphabet))
        if X is not None:
            for i, p in enumerate(X):
                check_posteriors(p, len(alphabet), name=f"utterance {i}")
        return alphabet

    def fit(self, X=None, y=None):
        if self.method not in ("beam", "greedy"):
            raise ValueError(f"method must be 'beam' or 'greedy', got {self.method!r}")
        self.alphabet_ = self._resolve_alphabet(X)
        self.params_ = BeamParams(self.beam_width, self.prune_threshold)
        return self

    def decode(self, X) -> list[DecodeResult]:
        _check_is_fitted(self, "alphabet_")
        if self.method == "greedy":
            return [greedy_decode(p, self.alphabet_) for p in X]
        return [beam_search_decode(p, self.alphabet_, self.params_) for p in X]

    def predict(self, X) -> list[str]:
        return [r.transcript for r in self.decode(X)]

    def score(self, X, y) -> float:
        """``1 - CER`` of the predictions against reference texts ``y``."""
        errors = ref_len = 0
        for ref, hyp in zip(y, self.predict(X)):
            a = edit_distance(normalize_text(ref), normalize_text(hyp))
            errors += a.errors
            ref_len += a.ref_len
        return 1.0 - error_rate(errors, ref_len)


class MannerMasker(TransformerMixin, BaseEstimator):
    """Mask character posteriors with the per-frame manner decision.

    ``transform`` maps ``(char, manner)`` pairs to masked character matrices.
    """

    def __init__(self, manner_map=None):
        self.manner_map = manner_map

    def fit(self, X=None, y=None):
        self.manner_map_ = self.manner_map if self.manner_map is not None else default_manner_map()
        if X is not None:
            _check_pairs(X, self.manner_map_)
        return self

    def plans(self, X):
        _check_is_fitted(self, "manner_map_")
        return [plan_from_manner_posteriors(pm, self.manner_map_) for _, pm in _check_pairs(X, self.manner_map_)]

    def transform(self, X):
        _check_is_fitted(self, "manner_map_")
        pairs = _check_pairs(X, self.manner_map_)
        return [mask_posteriors(pc, plan_from_manner_posteriors(pm, self.manner_map_)) for pc, pm in pairs]


class MannerConstrainedDecoder(CTCDecoder):
    """Manner masking followed by CTC decoding, on ``(char, manner)`` pairs."""

    def __init__(self, method="beam", beam_width=DEFAULT_BEAM_WIDTH, prune_threshold=0.0,
                 manner_map=None):
        self.method = method
        self.beam_width = beam_width
        self.prune_threshold = prune_threshold
        self.manner_map = manner_map

    def _resolve_alphabet(self, X):
        self.masker_ = MannerMasker(self.manner_map).fit(X)
        return self.masker_.manner_map_.chars

    def decode(self, X) -> list[DecodeResult]:
        _check_is_fitted(self, "masker_")
        return super().decode(self.masker_.transform(X))
