"""Bigram statistics that make corpus cost a pure table computation.

Two integer tables capture everything the distance model needs:

* ``within_word[a][b]``: letter a followed directly by letter b. The
  diagonal holds doubled letters, whose traversal is zero length.
* ``across_space[a][b]``: word-final a followed, across one space, by
  word-initial b. Column END (index 26) counts a space that ends the
  stream, which is typed but leads nowhere.

An interior space is two traversed segments (into and out of the space
sub-key nearest the preceding letter), a trailing space just one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import SPACE, KeySequence
from .geometry import (
    LETTER_INDEX,
    LETTERS,
    KeyboardGeometry,
    Layout,
    distance,
    nearest_space_slot,
)

END = 26  # column index for a stream-final space


@dataclass(eq=False)
class BigramStats:
    """Within-word and across-space transition counts for one corpus."""

    within_word: np.ndarray = field(default_factory=lambda: np.zeros((26, 26), dtype=np.int64))
    across_space: np.ndarray = field(default_factory=lambda: np.zeros((26, 27), dtype=np.int64))

    def __post_init__(self) -> None:
        self.within_word = np.asarray(self.within_word, dtype=np.int64)
        self.across_space = np.asarray(self.across_space, dtype=np.int64)
        if self.within_word.shape != (26, 26):
            raise ValueError("within_word must be 26x26")
        if self.across_space.shape != (26, 27):
            raise ValueError("across_space must be 26x27")
        if (self.within_word < 0).any() or (self.across_space < 0).any():
            raise ValueError("bigram counts must be non-negative")

    @property
    def total_transitions(self) -> int:
        interior = int(self.across_space[:, :END].sum())
        final = int(self.across_space[:, END].sum())
        return int(self.within_word.sum()) + 2 * interior + final

    @property
    def is_empty(self) -> bool:
        return self.total_transitions == 0

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BigramStats)
            and np.array_equal(other.within_word, self.within_word)
            and np.array_equal(other.across_space, self.across_space)
        )

    def to_json_dict(self) -> dict:
        return {
            "letters": LETTERS,
            "end_index": END,
            "within_word": self.within_word.tolist(),
            "across_space": self.across_space.tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> BigramStats:
        if data.get("letters") != LETTERS or data.get("end_index") != END:
            raise ValueError("unrecognized bigram table legend")
        return cls(
            within_word=np.array(data["within_word"], dtype=np.int64),
            across_space=np.array(data["across_space"], dtype=np.int64),
        )


def count_bigrams(seq: KeySequence) -> BigramStats:
    """Tally a key sequence into the two transition tables."""
    stats = BigramStats()
    f = stats.within_word
    s = stats.across_space
    text = seq.text
    n = len(text)
    for i in range(n - 1):
        a = text[i]
        if a == SPACE:
            continue
        b = text[i + 1]
        ia = LETTER_INDEX[a]
        if b != SPACE:
            f[ia][LETTER_INDEX[b]] += 1
        elif i + 2 < n:
            s[ia][LETTER_INDEX[text[i + 2]]] += 1
        else:
            s[ia][END] += 1
    return stats


@dataclass(frozen=True)
class PairUsage:
    """One direction-sensitive key pair with its share of all segments."""

    label: str
    count: int
    usage_pct: float
    distance_mm: float


def pair_usage(stats: BigramStats, g: KeyboardGeometry, layout: Layout) -> list[PairUsage]:
    """Per-pair traversal share and mean distance under one layout.

    Labels are direction sensitive ("e-sp" is the move into a space after
    e, "sp-e" the move out of a space into e). The distance of "sp-b" is
    the usage-weighted mean over the word-final letters that precede the
    space, because the sub-key in use depends on that letter. Rows are
    sorted by usage descending, ties alphabetically by label.
    """
    if stats.is_empty:
        raise ValueError("pair usage undefined for empty stats")
    total = stats.total_transitions
    sub_of = {ch: nearest_space_slot(g, layout.slot_of(ch)) for ch in LETTERS}
    rows: list[PairUsage] = []

    f = stats.within_word
    s = stats.across_space
    for ia, a in enumerate(LETTERS):
        for ib, b in enumerate(LETTERS):
            c = int(f[ia][ib])
            if c:
                d = distance(g, layout.slot_of(a), layout.slot_of(b))
                rows.append(PairUsage(f"{a}-{b}", c, 100.0 * c / total, d))

    for ia, a in enumerate(LETTERS):
        c = int(s[ia].sum())
        if c:
            d = distance(g, layout.slot_of(a), sub_of[a])
            rows.append(PairUsage(f"{a}-sp", c, 100.0 * c / total, d))

    for ib, b in enumerate(LETTERS):
        col = s[:, ib]
        c = int(col.sum())
        if c:
            num = sum(
                int(col[ia]) * distance(g, sub_of[a], layout.slot_of(b))
                for ia, a in enumerate(LETTERS)
                if col[ia]
            )
            rows.append(PairUsage(f"sp-{b}", c, 100.0 * c / total, num / c))

    rows.sort(key=lambda r: (-r.count, r.label))
    return rows
