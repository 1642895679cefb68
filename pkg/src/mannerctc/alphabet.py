"""Label inventories and the manner-of-articulation to character mapping.

Two inventories are involved in manner-constrained decoding:

* the character alphabet ``- A B ... Z >`` (blank, 26 letters, word boundary)
* the manner alphabet ``- V $ N F S >`` (blank, vowel, semi-vowel, nasal,
  fricative, stop, word boundary)

:class:`MannerMap` ties the two together: every character index belongs to
exactly one manner label. The built-in default is :func:`default_manner_map`.

Inventories can also be read from a small text file::

    - A B C D E F G H I J K L M N O P Q R S T U V W X Y Z >

    -: -
    V: A E I O U
    ...

The first line lists the ordered character alphabet; after a blank line each
line assigns characters to one manner label, in manner-index order.
"""

from __future__ import annotations

import os
import string
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .exceptions import AlphabetError, UnknownMannerError

BLANK = "-"
SPACE = ">"
APOSTROPHE = "'"

#: Manner label -> characters, in manner-index order (blank first).
DEFAULT_MANNER_CLASSES: dict[str, tuple[str, ...]] = {
    BLANK: (BLANK,),
    "V": ("A", "E", "I", "O", "U"),
    "$": ("L", "R", "W", "Y"),
    "N": ("M", "N"),
    "F": ("F", "H", "J", "S", "V", "X", "Z"),
    "S": ("B", "C", "D", "G", "K", "P", "Q", "T"),
    SPACE: (SPACE,),
}


@dataclass(frozen=True)
class Alphabet:
    """Ordered, immutable label inventory with a blank at index 0.

    Labels are single characters so transcripts can be handled as plain
    strings. ``space_symbol`` is the word-boundary label; in running text it
    is written as an ordinary space.
    """

    labels: tuple[str, ...]
    space_symbol: str | None = SPACE
    _index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 2:
            raise AlphabetError("an alphabet needs a blank and at least one emitting label")
        if labels[0] != BLANK:
            raise AlphabetError(f"index 0 must be the blank symbol {BLANK!r}, got {labels[0]!r}")
        for lab in labels:
            if not isinstance(lab, str) or len(lab) != 1 or lab.isspace():
                raise AlphabetError(f"labels must be single non-space characters, got {lab!r}")
        if len(set(labels)) != len(labels):
            dupes = sorted({lab for lab in labels if labels.count(lab) > 1})
            raise AlphabetError(f"duplicate labels: {' '.join(dupes)}")
        if self.space_symbol is not None and self.space_symbol not in labels:
            object.__setattr__(self, "space_symbol", None)
        object.__setattr__(
            self, "_index", MappingProxyType({lab: i for i, lab in enumerate(labels)})
        )

    blank_index = 0

    def __reduce__(self):
        return (type(self), (self.labels, self.space_symbol))

    @property
    def blank(self) -> str:
        return self.labels[0]

    @property
    def space_index(self) -> int | None:
        return None if self.space_symbol is None else self._index[self.space_symbol]

    def __len__(self):
        return len(self.labels)

    def __contains__(self, symbol):
        return symbol in self._index

    def __iter__(self):
        return iter(self.labels)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise AlphabetError(f"symbol {symbol!r} is not in the alphabet") from None

    def symbol(self, index: int) -> str:
        return self.labels[index]

    def to_symbols(self, text: str) -> str:
        """Uppercase ``text`` and write word boundaries as the space label."""
        text = text.upper()
        if self.space_symbol is not None:
            text = text.replace(" ", self.space_symbol)
        return text

    def encode(self, text: str) -> tuple[int, ...]:
        """Map running text (or a label string) to label indices.

        Raises :class:`AlphabetError` carrying the position of the first
        symbol that is not in the alphabet. Nothing is silently dropped.
        """
        out = []
        for pos, ch in enumerate(self.to_symbols(text)):
            idx = self._index.get(ch)
            if idx is None:
                raise AlphabetError(f"symbol {ch!r} at position {pos} is not in the alphabet")
            out.append(idx)
        return tuple(out)

    def decode(self, indices: Iterable[int], spaces: bool = True) -> str:
        """Inverse of :meth:`encode`; word boundaries become ``" "`` when ``spaces``."""
        text = "".join(self.labels[int(i)] for i in indices)
        if spaces and self.space_symbol is not None:
            text = text.replace(self.space_symbol, " ")
        return text


def default_alphabet(apostrophe: bool = False) -> Alphabet:
    """The 28-label character alphabet (29 with ``apostrophe``)."""
    labels = [BLANK, *string.ascii_uppercase, SPACE]
    if apostrophe:
        labels.append(APOSTROPHE)
    return Alphabet(tuple(labels))


def default_manner_alphabet(apostrophe: bool = False) -> Alphabet:
    """The 7-label manner alphabet (8 with ``apostrophe``)."""
    labels = list(DEFAULT_MANNER_CLASSES)
    if apostrophe:
        labels.append(APOSTROPHE)
    return Alphabet(tuple(labels))


class MannerMap:
    """Partition of a character alphabet into manner classes.

    Parameters
    ----------
    chars : Alphabet
        Character inventory whose indices are partitioned.
    classes : mapping of str to iterable of str
        Manner label -> member characters. Iteration order fixes the manner
        alphabet; the first entry must map to the character blank only.
    """

    def __init__(self, chars: Alphabet, classes: Mapping[str, Iterable[str]]):
        self.chars = chars
        manner_labels = tuple(classes)
        if not manner_labels:
            raise AlphabetError("a manner map needs at least one entry")
        self.manners = Alphabet(manner_labels, space_symbol=chars.space_symbol)

        entries: dict[str, frozenset[int]] = {}
        owner = np.full(len(chars), -1, dtype=np.intp)
        for m_idx, (label, members) in enumerate(classes.items()):
            idx = frozenset(chars.index(c) for c in members)
            if not idx:
                raise AlphabetError(f"manner {label!r} has no characters")
            for i in sorted(idx):
                if owner[i] >= 0:
                    raise AlphabetError(
                        f"character {chars.symbol(i)!r} is assigned to both "
                        f"{manner_labels[owner[i]]!r} and {label!r}"
                    )
                owner[i] = m_idx
            entries[label] = idx
        missing = [chars.symbol(i) for i in np.flatnonzero(owner < 0)]
        if missing:
            raise AlphabetError(f"characters without a manner class: {' '.join(missing)}")
        if entries[manner_labels[0]] != frozenset({chars.blank_index}):
            raise AlphabetError("the first manner entry must map to the character blank alone")

        self._entries = MappingProxyType(entries)
        owner.setflags(write=False)
        self._char_to_manner = owner
        allowed = np.zeros((len(self.manners), len(chars)), dtype=bool)
        allowed[owner, np.arange(len(chars))] = True
        allowed.setflags(write=False)
        self._allowed = allowed

    @property
    def entries(self) -> Mapping[str, frozenset[int]]:
        return self._entries

    @property
    def char_to_manner(self) -> np.ndarray:
        """Manner index for each character index (read-only)."""
        return self._char_to_manner

    @property
    def allowed(self) -> np.ndarray:
        """Boolean ``(n_manners, n_chars)`` support matrix (read-only)."""
        return self._allowed

    def manner_to_char_indices(self, manner: str | int) -> frozenset[int]:
        """Character indices that a manner label (or manner index) admits."""
        if isinstance(manner, (int, np.integer)):
            if not 0 <= manner < len(self.manners):
                raise UnknownMannerError(f"manner index {manner} is out of range")
            manner = self.manners.symbol(int(manner))
        try:
            return self._entries[manner]
        except KeyError:
            raise UnknownMannerError(f"unknown manner label {manner!r}") from None

    def manner_of(self, char_index: int) -> str:
        return self.manners.symbol(int(self._char_to_manner[char_index]))

    def classes(self) -> dict[str, tuple[str, ...]]:
        return {
            m: tuple(self.chars.symbol(i) for i in sorted(idx)) for m, idx in self._entries.items()
        }

    def __eq__(self, other):
        if not isinstance(other, MannerMap):
            return NotImplemented
        return self.chars == other.chars and self.classes() == other.classes()

    def __hash__(self):
        return hash((self.chars, tuple(self.classes().items())))

    def __reduce__(self):
        return (type(self), (self.chars, self.classes()))

    def __repr__(self):
        body = "; ".join(f"{m}: {' '.join(cs)}" for m, cs in self.classes().items())
        return f"MannerMap({body})"


def default_manner_map(apostrophe: bool = False) -> MannerMap:
    classes = dict(DEFAULT_MANNER_CLASSES)
    if apostrophe:
        classes[APOSTROPHE] = (APOSTROPHE,)
    return MannerMap(default_alphabet(apostrophe), classes)


def manner_to_char_indices(manner_map: MannerMap, manner: str | int) -> frozenset[int]:
    return manner_map.manner_to_char_indices(manner)


def chars_to_manner_transcript(alphabet: Alphabet, manner_map: MannerMap, text: str) -> str:
    """Replace every character of ``text`` by its manner label.

    Word boundaries come out as the space label (``">"`` by default), so
    ``"AN"`` gives ``"VN"``. The output has the same length as the input.
    """
    if manner_map.chars != alphabet:
        raise AlphabetError("manner map was built for a different character alphabet")
    indices = alphabet.encode(text)
    owner = manner_map.char_to_manner
    return "".join(manner_map.manners.labels[owner[i]] for i in indices)


# ---------------------------------------------------------------------------
# config file


def format_config(manner_map: MannerMap) -> str:
    lines = [" ".join(manner_map.chars.labels), ""]
    for m, chars in manner_map.classes().items():
        lines.append(f"{m}: {' '.join(chars)}")
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> MannerMap | Alphabet:
    """Parse the inventory file format.

    Returns a :class:`MannerMap` when manner entries are present, otherwise
    just the character :class:`Alphabet` from the header line.
    """
    lines = [ln.rstrip() for ln in text.splitlines()]
    lines = [ln for ln in lines if not ln.lstrip().startswith("#")]
    while lines and not lines[0].strip():
        lines.pop(0)
    if not lines:
        raise AlphabetError("empty alphabet file")
    header, rest = lines[0], lines[1:]
    first = header.split()[0]
    if len(first) > 1 and first.endswith(":"):
        raise AlphabetError("first line must list the character alphabet, not a manner entry")
    chars = Alphabet(tuple(header.split()))
    body = [ln for ln in rest if ln.strip()]
    if not body:
        return chars
    if rest and rest[0].strip():
        raise AlphabetError("a blank line must separate the header from the manner entries")
    classes: dict[str, tuple[str, ...]] = {}
    for lineno, ln in enumerate(body, start=3):
        label, sep, members = ln.strip().partition(":")
        label = label.strip()
        if not sep or not label:
            raise AlphabetError(f"malformed manner entry {ln!r}; expected 'MANNER: CHAR CHAR ...'")
        if label in classes:
            raise AlphabetError(f"manner {label!r} is listed twice")
        classes[label] = tuple(members.split())
    return MannerMap(chars, classes)


def load_config(path: str | os.PathLike) -> MannerMap | Alphabet:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def load_manner_map(path: str | os.PathLike | None = None, apostrophe: bool = False) -> MannerMap:
    """Read a manner map file, or return the built-in default when ``path`` is None."""
    if path is None:
        return default_manner_map(apostrophe)
    cfg = load_config(path)
    if not isinstance(cfg, MannerMap):
        raise AlphabetError(f"{os.fspath(path)} has no manner entries")
    return cfg


def load_alphabet(path: str | os.PathLike | None = None, apostrophe: bool = False) -> Alphabet:
    """Character alphabet from an inventory file (its header line), or the default."""
    if path is None:
        return default_alphabet(apostrophe)
    cfg = load_config(path)
    return cfg.chars if isinstance(cfg, MannerMap) else cfg


def save_config(manner_map: MannerMap, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_config(manner_map))
