"""Synthetic paired character/manner posterior streams.

A reference transcript is laid out on a canonical CTC alignment (each symbol
held for ``frames_per_symbol`` frames, blank gaps between symbols). The
character stream is that alignment's one-hot rows mixed with sparse random
rows; the manner stream peaks on the true manner of each frame except where
a whole symbol segment has been flipped to another manner.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import posterior
from .alphabet import Alphabet, MannerMap
from .posterior import PosteriorMatrix
from .validation import check_probability

# Manner rows put at least this much on their argmax label.
_MANNER_PEAK = 0.7

VOCABULARY = (
    "ZERO ONE TWO THREE FOUR FIVE SIX SEVEN EIGHT NINE TEN ELEVEN TWELVE THIRTEEN "
    "FOURTEEN FIFTEEN SIXTEEN SEVENTEEN EIGHTEEN NINETEEN TWENTY THIRTY FORTY FIFTY "
    "SIXTY SEVENTY EIGHTY NINETY HUNDRED OH ENTER RUBOUT STOP GO ERASE NO YES REPEAT "
    "START HELP"
).split()


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings.

    ``char_noise`` is the weight given to the random perturbation row in
    each character frame; ``noise_concentration`` is the Dirichlet
    concentration of that row (small values give sparse, peaky confusions).
    ``manner_error_rate`` is the probability that an emitting segment's
    manner is replaced by a different, randomly chosen manner.
    """

    frames_per_symbol: int = 4
    blank_fraction: float = 0.5
    char_noise: float = 0.0
    manner_error_rate: float = 0.0
    seed: int = 0
    noise_concentration: float = 0.1

    def __post_init__(self):
        if isinstance(self.frames_per_symbol, bool) or int(self.frames_per_symbol) != self.frames_per_symbol \
                or self.frames_per_symbol < 1:
            raise ValueError(f"frames_per_symbol must be a positive integer, got {self.frames_per_symbol!r}")
        object.__setattr__(self, "frames_per_symbol", int(self.frames_per_symbol))
        for name in ("blank_fraction", "char_noise", "manner_error_rate"):
            object.__setattr__(self, name, check_probability(getattr(self, name), name))
        if not self.noise_concentration > 0:
            raise ValueError("noise_concentration must be positive")
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def gap_frames(self) -> int:
        return int(round(self.blank_fraction * self.frames_per_symbol))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class SynthUtterance:
    utt_id: str
    ref: str
    char_posteriors: PosteriorMatrix
    manner_posteriors: PosteriorMatrix
    path: tuple[int, ...]
    manner_targets: tuple[int, ...]
    true_manners: tuple[int, ...]


def canonical_alignment(labels: Sequence[int], cfg: SynthConfig, blank: int = 0) -> tuple[list[int], list[tuple[int, int, int]]]:
    """Frame-level path for ``labels`` plus its emitting segments ``(label, start, stop)``."""
    gap = cfg.gap_frames
    path: list[int] = [blank] * gap
    segments = []
    prev = None
    for lab in labels:
        if lab == prev and (not path or path[-1] != blank):
            path.append(blank)
        start = len(path)
        path.extend([lab] * cfg.frames_per_symbol)
        segments.append((lab, start, len(path)))
        path.extend([blank] * gap)
        prev = lab
    if not path:
        path = [blank]
    return path, segments


def run_ids(path: Sequence[int]) -> np.ndarray:
    """Index of the run of equal labels each frame belongs to."""
    path = np.asarray(path)
    change = np.ones(len(path), dtype=np.intp)
    change[1:] = path[1:] != path[:-1]
    return np.cumsum(change) - 1


def generate(ref: str, cfg: SynthConfig, alphabet: Alphabet, manner_map: MannerMap,
             rng: np.random.Generator | None = None, utt_id: str = "") -> SynthUtterance:
    """Build one frame-synchronous pair of posterior streams for ``ref``."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if manner_map.chars != alphabet:
        raise ValueError("manner map was built for a different character alphabet")
    text = " ".join(ref.upper().split())
    labels = alphabet.encode(text)
    path, segments = canonical_alignment(labels, cfg, alphabet.blank_index)
    T, L = len(path), len(alphabet)
    M = len(manner_map.manners)
    frames = np.arange(T)

    char = np.zeros((T, L))
    char[frames, path] = 1.0
    if cfg.char_noise > 0:
        # one perturbation per aligned segment: a confusion persists over
        # the frames of the symbol (or blank gap) it affects
        runs = run_ids(path)
        noise = rng.dirichlet(np.full(L, cfg.noise_concentration), size=int(runs[-1]) + 1)
        char = (1.0 - cfg.char_noise) * char + cfg.char_noise * noise[runs]

    true_manner = manner_map.char_to_manner[np.asarray(path)]
    target = true_manner.copy()
    flips = rng.random(len(segments)) < cfg.manner_error_rate
    offsets = rng.integers(1, M, size=len(segments))
    for (lab, start, stop), flip, off in zip(segments, flips, offsets):
        if flip:
            target[start:stop] = (true_manner[start] + off) % M

    manner = rng.dirichlet(np.ones(M), size=T) * (1.0 - _MANNER_PEAK)
    manner[frames, target] += _MANNER_PEAK

    return SynthUtterance(
        utt_id=utt_id,
        ref=text,
        char_posteriors=PosteriorMatrix(char, alphabet.labels),
        manner_posteriors=PosteriorMatrix(manner, manner_map.manners.labels),
        path=tuple(path),
        manner_targets=tuple(int(m) for m in target),
        true_manners=tuple(int(m) for m in true_manner),
    )


def default_ids(n: int) -> list[str]:
    return [f"utt{i:05d}" for i in range(n)]


def generate_corpus(refs: Sequence[str], cfg: SynthConfig, alphabet: Alphabet,
                    manner_map: MannerMap, ids: Sequence[str] | None = None) -> list[SynthUtterance]:
    """Generate every utterance from its own child seed of ``cfg.seed``.

    Utterance ``i`` depends only on ``(cfg, refs[i], i)``, so generating a
    subset or generating in parallel reproduces the same matrices.
    """
    ids = default_ids(len(refs)) if ids is None else list(ids)
    if len(ids) != len(refs):
        raise ValueError(f"{len(ids)} ids for {len(refs)} references")
    children = np.random.SeedSequence(cfg.seed).spawn(len(refs))
    return [
        generate(ref, cfg, alphabet, manner_map, np.random.default_rng(ss), uid)
        for uid, ref, ss in zip(ids, refs, children)
    ]


def random_references(n: int, seed: int = 0, min_words: int = 3, max_words: int = 6,
                      vocabulary: Sequence[str] = VOCABULARY) -> list[str]:
    """Alphanumeric-style reference sentences drawn from a small vocabulary."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        k = int(rng.integers(min_words, max_words + 1))
        out.append(" ".join(vocabulary[int(i)] for i in rng.integers(0, len(vocabulary), size=k)))
    return out


# ---------------------------------------------------------------------------
# manifests


@dataclass(frozen=True)
class ManifestEntry:
    utt_id: str
    char_path: str | None
    manner_path: str | None
    ref: str
    error: str | None = None


MANIFEST_NAME = "manifest.tsv"


def write_corpus(corpus: Sequence[SynthUtterance], out_dir: str | os.PathLike,
                 format: str = "bin", alphabet: Alphabet | None = None,
                 manner_alphabet: Alphabet | None = None) -> Path:
    """Write every stream pair and a manifest; returns the manifest path.

    Manifest paths are relative to the manifest's directory.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ext = "bin" if format == "bin" else "txt"
    lines = []
    for utt in corpus:
        cname, mname = f"{utt.utt_id}.char.{ext}", f"{utt.utt_id}.manner.{ext}"
        posterior.save(utt.char_posteriors, out / cname, format, alphabet)
        posterior.save(utt.manner_posteriors, out / mname, format, manner_alphabet)
        lines.append(f"{utt.utt_id}\t{cname}\t{mname}\t{utt.ref}\n")
    path = out / MANIFEST_NAME
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(lines)
    return path


def read_manifest(path: str | os.PathLike) -> list[ManifestEntry]:
    """Parse ``id<TAB>char_path<TAB>manner_path<TAB>reference`` lines.

    Malformed lines become entries with ``error`` set instead of raising.
    """
    base = Path(path).parent
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                uid = fields[0] if fields else f"line{lineno}"
                entries.append(ManifestEntry(uid, None, None, "",
                                             f"line {lineno}: expected 4 tab-separated fields, got {len(fields)}"))
                continue
            uid, cpath, mpath, ref = fields
            entries.append(ManifestEntry(uid, str(base / cpath), str(base / mpath), ref))
    return entries


def read_text_lines(path: str | os.PathLike) -> list[tuple[str, str]]:
    """Read ``text`` or ``id<TAB>text`` lines; missing ids are numbered."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh.read().splitlines()):
            uid, sep, text = line.partition("\t")
            if not sep:
                uid, text = f"utt{i:05d}", line
            out.append((uid, text))
    return out
