"""Manner-constrained posterior masking.

For each frame the most probable manner label selects which characters may
be emitted; every other character posterior is set to zero and the row is
renormalized. Beam search then runs on the masked matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alphabet import Alphabet, MannerMap
from .decode import BeamParams, DecodeResult, beam_search_decode
from .validation import check_frame_sync, check_posteriors

#: Rows whose allowed mass is below this fall back to a uniform distribution.
DEGENERATE_MASS = 1e-12


@dataclass(frozen=True)
class MannerFramePlan:
    manner_index_per_frame: tuple[int, ...]
    allowed_char_indices_per_frame: tuple[frozenset[int], ...]
    support: np.ndarray  # bool (T, n_chars)

    def __len__(self):
        return len(self.manner_index_per_frame)

    def manner_labels(self, manner_map: MannerMap) -> str:
        return "".join(manner_map.manners.labels[m] for m in self.manner_index_per_frame)


def plan_from_support(manner_index, manner_map: MannerMap) -> MannerFramePlan:
    manner_index = np.asarray(manner_index, dtype=np.intp)
    support = manner_map.allowed[manner_index]
    support.setflags(write=False)
    allowed = tuple(manner_map.manner_to_char_indices(int(m)) for m in manner_index)
    return MannerFramePlan(tuple(int(m) for m in manner_index), allowed, support)


def plan_from_manner_posteriors(manner_posteriors, manner_map: MannerMap) -> MannerFramePlan:
    """Hard per-frame manner decision (argmax, lowest index on ties)."""
    pm = check_posteriors(manner_posteriors, len(manner_map.manners), name="manner posteriors")
    return plan_from_support(np.argmax(pm, axis=1), manner_map)


def mask_posteriors(char_posteriors, plan: MannerFramePlan) -> np.ndarray:
    """Zero the characters outside each frame's allowed set and L1-renormalize.

    A frame with (numerically) no mass on its allowed set becomes uniform
    over that set, so the manner decision is always honoured.
    """
    pc = check_posteriors(char_posteriors, plan.support.shape[1], name="character posteriors")
    if len(pc) != len(plan):
        raise ValueError(f"plan covers {len(plan)} frames but the posteriors have {len(pc)}")
    support = plan.support
    out = np.where(support, pc, 0.0)
    mass = out.sum(axis=1)
    degenerate = mass < DEGENERATE_MASS
    if degenerate.any():
        out[degenerate] = support[degenerate]
        mass[degenerate] = support[degenerate].sum(axis=1)
    out /= mass[:, None]
    return out


def manner_based_char_decode(char_posteriors, manner_posteriors, alphabet: Alphabet,
                             manner_map: MannerMap, params: BeamParams = BeamParams()) -> DecodeResult:
    """Plan from the manner stream, mask the character stream, beam search."""
    pc = check_posteriors(char_posteriors, len(alphabet), name="character posteriors")
    pm = check_posteriors(manner_posteriors, len(manner_map.manners), name="manner posteriors")
    check_frame_sync(pc, pm)
    if manner_map.chars != alphabet:
        raise ValueError("manner map was built for a different character alphabet")
    plan = plan_from_manner_posteriors(pm, manner_map)
    return beam_search_decode(mask_posteriors(pc, plan), alphabet, params)
