"""Manner-of-articulation constrained CTC decoding.

Character posteriors are masked frame by frame with the argmax of a manner
posterior stream, renormalized, and decoded by CTC prefix beam search.
"""

from .alphabet import (
    Alphabet,
    MannerMap,
    chars_to_manner_transcript,
    default_alphabet,
    default_manner_alphabet,
    default_manner_map,
    load_alphabet,
    load_manner_map,
    manner_to_char_indices,
)
from .ctc import enumerate_oracle, forward_log_probability, forward_probability, squash
from .decode import BeamParams, DecodeResult, beam_search_decode, greedy_decode
from .estimators import CTCDecoder, MannerConstrainedDecoder, MannerMasker
from .exceptions import (
    AlphabetError,
    InstanceTooLargeError,
    MannerCTCError,
    PosteriorError,
    UnknownMannerError,
)
from .mask import (
    MannerFramePlan,
    manner_based_char_decode,
    mask_posteriors,
    plan_from_manner_posteriors,
)
from .metrics import EditAlignment, ScoreReport, edit_distance, score_corpus
from .posterior import PosteriorMatrix, ValidationReport, validate
from .synth import SynthConfig, generate, generate_corpus

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "AlphabetError",
    "BeamParams",
    "CTCDecoder",
    "DecodeResult",
    "EditAlignment",
    "InstanceTooLargeError",
    "MannerCTCError",
    "MannerConstrainedDecoder",
    "MannerFramePlan",
    "MannerMap",
    "MannerMasker",
    "PosteriorError",
    "PosteriorMatrix",
    "ScoreReport",
    "SynthConfig",
    "UnknownMannerError",
    "ValidationReport",
    "beam_search_decode",
    "chars_to_manner_transcript",
    "default_alphabet",
    "default_manner_alphabet",
    "default_manner_map",
    "edit_distance",
    "enumerate_oracle",
    "forward_log_probability",
    "forward_probability",
    "generate",
    "generate_corpus",
    "greedy_decode",
    "load_alphabet",
    "load_manner_map",
    "manner_based_char_decode",
    "manner_to_char_indices",
    "mask_posteriors",
    "plan_from_manner_posteriors",
    "score_corpus",
    "squash",
    "validate",
]
