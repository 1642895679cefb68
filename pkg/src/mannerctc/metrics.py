"""Edit-distance scoring: word, character and manner error rates.

Rates are ``(S + I + D) / N`` at the respective token granularity. Corpus
rates pool errors and reference lengths over all utterances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .alphabet import Alphabet, MannerMap, chars_to_manner_transcript
from .exceptions import AlphabetError

MATCH, SUBSTITUTE, INSERT, DELETE = "match", "substitute", "insert", "delete"


@dataclass(frozen=True)
class EditAlignment:
    """Levenshtein-optimal alignment of a hypothesis against a reference.

    ``operations`` holds ``(op, ref_pos, hyp_pos)`` triples in order; the
    position not consumed by an insertion or deletion is ``None``.
    """

    operations: tuple[tuple[str, int | None, int | None], ...]
    substitutions: int
    insertions: int
    deletions: int
    matches: int
    ref_len: int
    hyp_len: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    distance = errors

    @property
    def rate(self) -> float:
        return error_rate(self.errors, self.ref_len)

    def summary(self) -> dict:
        return {
            "S": self.substitutions,
            "I": self.insertions,
            "D": self.deletions,
            "N": self.ref_len,
            "errors": self.errors,
            "rate": self.rate,
        }


def error_rate(errors: int, ref_len: int) -> float:
    if ref_len == 0:
        return 0.0 if errors == 0 else float("inf")
    return errors / ref_len


def edit_distance(ref: Sequence, hyp: Sequence) -> EditAlignment:
    """Unit-cost alignment of two token sequences.

    On ties the backtrace prefers match, then substitution, deletion and
    insertion, so the result is fully deterministic.
    """
    ref, hyp = list(ref), list(hyp)
    n, m = len(ref), len(hyp)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        row, prev = d[i], d[i - 1]
        row[0] = i
        r = ref[i - 1]
        for j in range(1, m + 1):
            diag = prev[j - 1] + (r != hyp[j - 1])
            row[j] = min(diag, prev[j] + 1, row[j - 1] + 1)

    ops = []
    counts = {MATCH: 0, SUBSTITUTE: 0, INSERT: 0, DELETE: 0}
    i, j = n, m
    while i > 0 or j > 0:
        here = d[i][j]
        if i and j and ref[i - 1] == hyp[j - 1] and here == d[i - 1][j - 1]:
            op = MATCH
        elif i and j and here == d[i - 1][j - 1] + 1:
            op = SUBSTITUTE
        elif i and here == d[i - 1][j] + 1:
            op = DELETE
        else:
            op = INSERT
        if op in (MATCH, SUBSTITUTE):
            i, j = i - 1, j - 1
            ops.append((op, i, j))
        elif op == DELETE:
            i -= 1
            ops.append((op, i, None))
        else:
            j -= 1
            ops.append((op, None, j))
        counts[op] += 1
    ops.reverse()
    return EditAlignment(
        operations=tuple(ops),
        substitutions=counts[SUBSTITUTE],
        insertions=counts[INSERT],
        deletions=counts[DELETE],
        matches=counts[MATCH],
        ref_len=n,
        hyp_len=m,
    )


def normalize_text(text: str) -> str:
    """Uppercase, strip, and collapse internal whitespace runs to one space."""
    return " ".join(text.upper().split())


@dataclass(frozen=True)
class UtteranceScore:
    utt_id: str
    ref: str
    hyp: str
    word: EditAlignment
    char: EditAlignment
    manner: EditAlignment

    def summary(self) -> dict:
        return {
            "id": self.utt_id,
            "ref": self.ref,
            "hyp": self.hyp,
            "wer": self.word.summary(),
            "cer": self.char.summary(),
            "mer": self.manner.summary(),
        }


@dataclass(frozen=True)
class ScoreReport:
    wer: float
    cer: float
    mer: float
    per_utterance: tuple[UtteranceScore, ...] = field(repr=False)

    def totals(self, level: str) -> dict:
        aligns = [getattr(u, level) for u in self.per_utterance]
        out = {k: sum(getattr(a, attr) for a in aligns) for k, attr in
               (("S", "substitutions"), ("I", "insertions"), ("D", "deletions"), ("N", "ref_len"))}
        out["errors"] = out["S"] + out["I"] + out["D"]
        return out

    def mean_utterance_rates(self) -> dict:
        """Unweighted mean of per-utterance rates (not the headline number)."""
        n = len(self.per_utterance)
        if n == 0:
            return {"wer": 0.0, "cer": 0.0, "mer": 0.0}
        return {
            key: sum(getattr(u, level).rate for u in self.per_utterance) / n
            for key, level in (("wer", "word"), ("cer", "char"), ("mer", "manner"))
        }

    def to_dict(self, per_utt: bool = False) -> dict:
        out = {
            "wer": self.wer,
            "cer": self.cer,
            "mer": self.mer,
            "utterances": len(self.per_utterance),
            "totals": {"wer": self.totals("word"), "cer": self.totals("char"),
                       "mer": self.totals("manner")},
            "mean_per_utterance": self.mean_utterance_rates(),
        }
        if per_utt:
            out["per_utterance"] = [u.summary() for u in self.per_utterance]
        return out


def score_utterance(ref: str, hyp: str, alphabet: Alphabet, manner_map: MannerMap,
                    utt_id: str = "") -> UtteranceScore:
    ref_n, hyp_n = normalize_text(ref), normalize_text(hyp)
    try:
        ref_m = chars_to_manner_transcript(alphabet, manner_map, ref_n)
    except AlphabetError as exc:
        raise AlphabetError(f"utterance {utt_id!r} reference: {exc}") from None
    try:
        hyp_m = chars_to_manner_transcript(alphabet, manner_map, hyp_n)
    except AlphabetError as exc:
        raise AlphabetError(f"utterance {utt_id!r} hypothesis: {exc}") from None
    return UtteranceScore(
        utt_id=utt_id,
        ref=ref_n,
        hyp=hyp_n,
        word=edit_distance(ref_n.split(), hyp_n.split()),
        char=edit_distance(ref_n, hyp_n),
        manner=edit_distance(ref_m, hyp_m),
    )


def pool(utterances: Iterable[UtteranceScore]) -> ScoreReport:
    utts = tuple(utterances)

    def rate(level):
        aligns = [getattr(u, level) for u in utts]
        return error_rate(sum(a.errors for a in aligns), sum(a.ref_len for a in aligns))

    return ScoreReport(wer=rate("word"), cer=rate("char"), mer=rate("manner"), per_utterance=utts)


def score_corpus(pairs: Iterable[tuple[str, str]], alphabet: Alphabet, manner_map: MannerMap,
                 ids: Sequence[str] | None = None) -> ScoreReport:
    """Score ``(reference, hypothesis)`` text pairs at word, character and manner level."""
    pairs = list(pairs)
    if ids is None:
        ids = [str(i) for i in range(len(pairs))]
    if len(ids) != len(pairs):
        raise ValueError(f"{len(ids)} ids for {len(pairs)} pairs")
    return pool(
        score_utterance(ref, hyp, alphabet, manner_map, uid) for uid, (ref, hyp) in zip(ids, pairs)
    )


def manner_error_rate(pairs: Iterable[tuple[str, str]]) -> float:
    """MER for pairs that are already manner label strings."""
    errors = ref_len = 0
    for ref, hyp in pairs:
        a = edit_distance(ref, hyp)
        errors += a.errors
        ref_len += a.ref_len
    return error_rate(errors, ref_len)
