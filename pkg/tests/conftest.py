"""Shared fixtures, random-corpus helpers, and the naive search oracle."""

from __future__ import annotations

import itertools
import random

import pytest

from keyswap import KeySequence, build_geometry, qwerty_layout
from keyswap.effort import stats_cost
from keyswap.geometry import LETTERS, SwapSet, apply_swaps


@pytest.fixture(scope="session")
def geometry():
    return build_geometry()


@pytest.fixture(scope="session")
def qwerty():
    return qwerty_layout()


def random_corpus_text(rng: random.Random, lo: int = 10, hi: int = 2000) -> str:
    """Valid random key stream: starts with a letter, no double spaces."""
    n = rng.randint(lo, hi)
    out = [chr(rng.randrange(97, 123))]
    while len(out) < n:
        if out[-1] != " " and rng.random() < 0.18:
            out.append(" ")
        else:
            out.append(chr(rng.randrange(97, 123)))
    return "".join(out)


def random_sequence(rng: random.Random, lo: int = 10, hi: int = 2000) -> KeySequence:
    return KeySequence(random_corpus_text(rng, lo, hi))


def canonical_pair_tuples(n: int):
    """All canonical n-pair swap tuples, built independently of the
    package's own enumeration."""
    all_pairs = list(itertools.combinations(LETTERS, 2))
    for combo in itertools.combinations(all_pairs, n):
        letters = [ch for p in combo for ch in p]
        if len(set(letters)) == 2 * n:
            yield combo


def brute_force(g, stats, n):
    """Naive reference search: full recompute per candidate, ties to the
    lexicographically smallest canonical pair tuple."""
    base = qwerty_layout()
    best = None
    for pairs in canonical_pair_tuples(n):
        swaps = SwapSet(pairs)
        cost = stats_cost(g, apply_swaps(base, swaps), stats)
        key = (cost, pairs)
        if best is None or key < best:
            best = key
    return best[1], best[0]
