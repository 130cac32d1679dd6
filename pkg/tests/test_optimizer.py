"""Exhaustive swap search: oracle match, enumeration, determinism."""

from __future__ import annotations

import itertools
import json
import random

import pytest

from keyswap.corpus import KeySequence
from keyswap.effort import stats_cost
from keyswap.geometry import qwerty_layout
from keyswap.optimizer import (
    OptimizationResult,
    SearchConfig,
    enumerate_swapsets,
    optimize,
    swap_count,
    verify_result,
)
from keyswap.stats import BigramStats, count_bigrams

from conftest import brute_force, canonical_pair_tuples, random_corpus_text


@pytest.mark.parametrize("n", [1, 2])
def test_optimize_matches_brute_force(geometry, n):
    rng = random.Random(4242 + n)
    for _ in range(4):
        stats = count_bigrams(KeySequence(random_corpus_text(rng, 60, 400)))
        got = optimize(geometry, stats, SearchConfig(n_swap_pairs=n))
        want_pairs, want_cost = brute_force(geometry, stats, n)
        assert got.swaps.pairs == want_pairs
        assert got.best_cost_mm == want_cost
        assert got.candidates == swap_count(n)


def test_enumeration_counts():
    assert swap_count(1) == 325
    assert swap_count(2) == 44_850
    assert swap_count(3) == 3_453_450
    assert swap_count(3, "paper") == 2_302_300
    assert sum(1 for _ in enumerate_swapsets(1)) == 325
    assert sum(1 for _ in enumerate_swapsets(2)) == 44_850


def test_enumeration_is_canonical_and_ordered():
    seen = list(itertools.islice(enumerate_swapsets(2), 2000))
    assert all(s.is_canonical() for s in seen)
    encodings = [s.pairs for s in seen]
    assert encodings == sorted(encodings)
    # The stream begins at the smallest two disjoint pairs.
    assert encodings[0] == (("a", "b"), ("c", "d"))
    assert encodings[1] == (("a", "b"), ("c", "e"))


def test_enumeration_matches_independent_generator():
    got = [s.pairs for s in enumerate_swapsets(2)]
    want = sorted(canonical_pair_tuples(2))
    assert got == want


def test_enumeration_rejects_bad_arguments():
    with pytest.raises(ValueError):
        list(enumerate_swapsets(4))
    with pytest.raises(ValueError):
        list(enumerate_swapsets(2, "paper"))
    with pytest.raises(ValueError):
        list(enumerate_swapsets(1, "random"))


def test_paper_mode_enumeration_prefix():
    stream = enumerate_swapsets(3, "paper")
    first = next(stream)
    # Triplet (a,b,c) paired with (d,e,f) position-wise.
    assert first.pairs == (("a", "d"), ("b", "e"), ("c", "f"))
    assert first.is_canonical()


def test_paper_mode_telemetry_and_dominance(geometry):
    rng = random.Random(11)
    stats = count_bigrams(KeySequence(random_corpus_text(rng, 200, 400)))
    paper = optimize(geometry, stats, SearchConfig(mode="paper"))
    assert paper.raw_ordered_pairs == 6_757_400
    assert paper.candidates == 2_302_300
    assert verify_result(geometry, stats, paper)
    canonical = optimize(geometry, stats, SearchConfig(n_swap_pairs=3))
    assert canonical.candidates == 3_453_450
    assert canonical.raw_ordered_pairs is None
    # Triplet pairings are a strict subset of all 3-pair swap sets.
    assert canonical.best_cost_mm <= paper.best_cost_mm


def test_cumulative_candidate_count(geometry):
    stats = count_bigrams(KeySequence("the quick brown fox jumps over the lazy dog"))
    res = optimize(geometry, stats, SearchConfig(cumulative=True))
    assert res.candidates == 1 + 325 + 44_850 + 3_453_450
    assert res.cumulative
    # A bigger pool can only help.
    plain = optimize(geometry, stats, SearchConfig(n_swap_pairs=3))
    assert res.best_cost_mm <= plain.best_cost_mm


def test_cumulative_small_sizes(geometry):
    rng = random.Random(8)
    stats = count_bigrams(KeySequence(random_corpus_text(rng, 80, 200)))
    res = optimize(geometry, stats, SearchConfig(n_swap_pairs=2, cumulative=True))
    assert res.candidates == 1 + 325 + 44_850
    want_pairs, want_cost = brute_force(geometry, stats, 2)
    one_pairs, one_cost = brute_force(geometry, stats, 1)
    base = stats_cost(geometry, qwerty_layout(), stats)
    options = [(want_cost, want_pairs), (one_cost, one_pairs), (base, ())]
    best_cost, best_pairs = min(options)
    assert res.swaps.pairs == best_pairs
    assert res.best_cost_mm == best_cost


def test_worker_count_does_not_change_output(geometry):
    rng = random.Random(5150)
    stats = count_bigrams(KeySequence(random_corpus_text(rng, 300, 600)))
    solo = optimize(geometry, stats, SearchConfig(n_swap_pairs=2, workers=1))
    multi = optimize(geometry, stats, SearchConfig(n_swap_pairs=2, workers=3))
    assert solo.to_json_dict() == multi.to_json_dict()
    assert json.dumps(solo.to_json_dict()) == json.dumps(multi.to_json_dict())


def test_optimize_rejects_degenerate_inputs(geometry):
    with pytest.raises(ValueError):
        optimize(geometry, BigramStats())
    # A corpus of one doubled letter has positive presses but zero cost.
    with pytest.raises(ValueError):
        optimize(geometry, count_bigrams(KeySequence("aa")))


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(n_swap_pairs=4)
    with pytest.raises(ValueError):
        SearchConfig(mode="simulated")
    with pytest.raises(ValueError):
        SearchConfig(mode="paper", n_swap_pairs=2)
    with pytest.raises(ValueError):
        SearchConfig(mode="paper", cumulative=True)
    with pytest.raises(ValueError):
        SearchConfig(workers=0)


def test_search_config_json_round_trip():
    cfg = SearchConfig(n_swap_pairs=2, cumulative=True, workers=4)
    assert SearchConfig.from_json_dict(json.loads(json.dumps(cfg.to_json_dict()))) == cfg


def test_result_json_round_trip_and_wall_time(geometry):
    stats = count_bigrams(KeySequence("round trip me please"))
    res = optimize(geometry, stats, SearchConfig(n_swap_pairs=1))
    assert res.wall_time_s is not None and res.wall_time_s > 0.0
    d = res.to_json_dict()
    # Serialized wall time is null so reruns emit identical bytes.
    assert d["wall_time_s"] is None
    assert "cumulative" not in d
    timed = res.to_json_dict(include_wall_time=True)
    assert timed["wall_time_s"] == res.wall_time_s
    again = OptimizationResult.from_json_dict(d)
    assert again.swaps == res.swaps
    assert again.best_cost_mm == res.best_cost_mm
    assert verify_result(geometry, stats, again)


def test_verify_result_catches_tampering(geometry):
    stats = count_bigrams(KeySequence("tamper detection works"))
    res = optimize(geometry, stats, SearchConfig(n_swap_pairs=1))
    assert verify_result(geometry, stats, res)
    d = res.to_json_dict()
    d["best_cost_mm"] *= 1.001
    assert not verify_result(geometry, stats, OptimizationResult.from_json_dict(d))
    d = res.to_json_dict()
    d["swaps"] = [list(reversed(d["swaps"][0]))]
    assert not verify_result(geometry, stats, OptimizationResult.from_json_dict(d))
