"""Exhaustive search over letter-swap sets.

Two candidate generators are supported. Canonical mode enumerates every
set of n disjoint unordered letter pairs (325 / 44,850 / 3,453,450 for
n = 1 / 2 / 3). Triplet mode pairs two disjoint sorted 3-letter groups
position by position; it emits 2,302,300 candidate evaluations out of
6,757,400 raw ordered group pairs and reaches a strict subset of the
canonical n=3 layouts, so its optimum can never beat the canonical one.

The search kernel never recomputes full layout costs. Because cost is a
sum over letter pairs, the change from applying disjoint transpositions
p1..pn decomposes exactly into per-transposition deltas d1[p] plus
pairwise cross terms c2[p, q]; both tables are precomputed once per
(geometry, stats, model), after which each candidate costs six lookups.
Results are reduced with the key (cost, canonical encoding), which makes
the winner independent of worker count and scheduling.
"""

from __future__ import annotations

import itertools
import math
import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .effort import (
    DISTANCE_MODEL,
    EffortModel,
    delta_cost,
    effort_tables,
    letter_slot_vector,
    stats_cost,
)
from .geometry import LETTERS, KeyboardGeometry, Layout, SwapSet, apply_swaps, qwerty_layout
from .stats import END, BigramStats

MODES = ("canonical", "paper")

_N_LETTERS = 26
_N_PAIRS = 325  # C(26, 2)
_N_TRIPLETS = 2600  # C(26, 3)


@dataclass(frozen=True)
class SearchConfig:
    """Search space and execution knobs for optimize()."""

    n_swap_pairs: int = 3
    mode: str = "canonical"
    cumulative: bool = False
    workers: int = 1
    model: EffortModel = DISTANCE_MODEL

    def __post_init__(self) -> None:
        if self.n_swap_pairs not in (1, 2, 3):
            raise ValueError("n_swap_pairs must be 1, 2 or 3")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "paper":
            if self.n_swap_pairs != 3:
                raise ValueError("triplet mode is defined only for n_swap_pairs=3")
            if self.cumulative:
                raise ValueError("triplet mode does not support cumulative search")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def to_json_dict(self) -> dict:
        d = {
            "n_swap_pairs": self.n_swap_pairs,
            "mode": self.mode,
            "cumulative": self.cumulative,
            "workers": self.workers,
        }
        if self.model != DISTANCE_MODEL:
            d["model"] = {
                "kind": self.model.kind,
                "alpha": self.model.alpha,
                "beta": self.model.beta,
                "key_area_mm2": self.model.key_area_mm2,
            }
        return d

    @classmethod
    def from_json_dict(cls, data: dict) -> SearchConfig:
        model = DISTANCE_MODEL
        if "model" in data:
            model = EffortModel(**data["model"])
        return cls(
            n_swap_pairs=data.get("n_swap_pairs", 3),
            mode=data.get("mode", "canonical"),
            cumulative=data.get("cumulative", False),
            workers=data.get("workers", 1),
            model=model,
        )


@dataclass(frozen=True)
class OptimizationResult:
    """Winner of a search plus enough telemetry to audit it."""

    swaps: SwapSet
    qwerty_cost_mm: float
    best_cost_mm: float
    per_pct: float
    candidates: int
    mode: str
    cumulative: bool = False
    wall_time_s: float | None = None
    raw_ordered_pairs: int | None = None

    def to_json_dict(self, include_wall_time: bool = False) -> dict:
        # wall time is dropped from canonical output so identical inputs
        # serialize to identical bytes
        d = {
            "swaps": [[a, b] for a, b in self.swaps.pairs],
            "qwerty_cost_mm": self.qwerty_cost_mm,
            "best_cost_mm": self.best_cost_mm,
            "per_pct": self.per_pct,
            "candidates": self.candidates,
            "mode": self.mode,
            "wall_time_s": self.wall_time_s if include_wall_time else None,
        }
        if self.cumulative:
            d["cumulative"] = True
        if self.raw_ordered_pairs is not None:
            d["raw_ordered_pairs"] = self.raw_ordered_pairs
        return d

    @classmethod
    def from_json_dict(cls, data: dict) -> OptimizationResult:
        return cls(
            swaps=SwapSet(tuple((a, b) for a, b in data["swaps"])),
            qwerty_cost_mm=data["qwerty_cost_mm"],
            best_cost_mm=data["best_cost_mm"],
            per_pct=data["per_pct"],
            candidates=data["candidates"],
            mode=data["mode"],
            cumulative=data.get("cumulative", False),
            wall_time_s=data.get("wall_time_s"),
            raw_ordered_pairs=data.get("raw_ordered_pairs"),
        )


# ---------------------------------------------------------------------------
# static candidate structure (depends only on the 26-letter alphabet)


@lru_cache(maxsize=1)
def _pair_space():
    pairs = tuple(itertools.combinations(range(_N_LETTERS), 2))
    u = np.array([p[0] for p in pairs], dtype=np.intp)
    v = np.array([p[1] for p in pairs], dtype=np.intp)
    pair_idx = np.full((_N_LETTERS, _N_LETTERS), -1, dtype=np.intp)
    for k, (a, b) in enumerate(pairs):
        pair_idx[a, b] = k
    compat = np.ones((_N_PAIRS, _N_PAIRS), dtype=bool)
    for k, (a, b) in enumerate(pairs):
        clash = (u == a) | (u == b) | (v == a) | (v == b)
        compat[k] = ~clash
        compat[k, k] = False
    return pairs, u, v, pair_idx, compat


@lru_cache(maxsize=1)
def _blocks3() -> tuple[np.ndarray, np.ndarray]:
    """All disjoint (i, j) pair-index blocks with i < j, in canonical order."""
    _, _, _, _, compat = _pair_space()
    i_list: list[np.ndarray] = []
    j_list: list[np.ndarray] = []
    for i in range(_N_PAIRS):
        js = np.flatnonzero(compat[i, i + 1 :]) + (i + 1)
        i_list.append(np.full(js.shape, i, dtype=np.intp))
        j_list.append(js)
    return np.concatenate(i_list), np.concatenate(j_list)


@lru_cache(maxsize=1)
def _triplet_space():
    trips = np.array(list(itertools.combinations(range(_N_LETTERS), 3)), dtype=np.intp)
    masks = (1 << trips[:, 0]) | (1 << trips[:, 1]) | (1 << trips[:, 2])
    return trips, masks


# ---------------------------------------------------------------------------
# delta tables


def _build_delta_tables(
    g: KeyboardGeometry,
    stats: BigramStats,
    base: Layout,
    base_cost: float,
    model: EffortModel,
) -> tuple[np.ndarray, np.ndarray]:
    """d1[p]: cost change of single swap p; c2[p, q]: cross term of p and q."""
    pairs, u, v, _, compat = _pair_space()
    d1 = np.zeros(_N_PAIRS)
    for k, (a, b) in enumerate(pairs):
        s = SwapSet(((LETTERS[a], LETTERS[b]),))
        d1[k] = delta_cost(g, base, base_cost, stats, s, model) - base_cost

    t = effort_tables(g, model)
    slots = letter_slot_vector(base)
    f = stats.within_word.astype(np.float64)
    s_in = stats.across_space[:, :END].astype(np.float64)

    idx_i, idx_j = np.nonzero(np.triu(compat, 1))
    au, av, bu, bv = u[idx_i], v[idx_i], u[idx_j], v[idx_j]
    o = slots
    combos = (
        # (a, old slot of a, new slot of a, b, old slot of b, new slot of b)
        (au, o[au], o[av], bu, o[bu], o[bv]),
        (au, o[au], o[av], bv, o[bv], o[bu]),
        (av, o[av], o[au], bu, o[bu], o[bv]),
        (av, o[av], o[au], bv, o[bv], o[bu]),
        (bu, o[bu], o[bv], au, o[au], o[av]),
        (bu, o[bu], o[bv], av, o[av], o[au]),
        (bv, o[bv], o[bu], au, o[au], o[av]),
        (bv, o[bv], o[bu], av, o[av], o[au]),
    )
    vals = np.zeros(idx_i.shape[0])
    for a, oa, na, b, ob, nb in combos:
        dd = t.slot_to_slot
        gg = t.space_to_slot
        vals += f[a, b] * (dd[na, nb] - dd[na, ob] - dd[oa, nb] + dd[oa, ob])
        vals += s_in[a, b] * (gg[na, nb] - gg[na, ob] - gg[oa, nb] + gg[oa, ob])

    c2 = np.zeros((_N_PAIRS, _N_PAIRS))
    c2[idx_i, idx_j] = vals
    c2[idx_j, idx_i] = vals
    return d1, c2


# ---------------------------------------------------------------------------
# block evaluation (shared by the sequential and parallel paths)

# A candidate is (cost delta, sorted pair-index tuple). Pair indices are
# lexicographic over letter pairs, so tuple comparison reproduces canonical
# SwapSet order, including across sizes (shorter tuples win on shared prefix).
_Best = tuple[float, tuple[int, ...]]


def _merge(best: _Best | None, cand: _Best | None) -> _Best | None:
    if cand is None:
        return best
    if best is None or cand < best:
        return cand
    return best


def _eval_size1(d1: np.ndarray) -> tuple[_Best, int]:
    a = int(np.argmin(d1))
    return (float(d1[a]), (a,)), _N_PAIRS


def _eval_size2_chunk(d1, c2, compat, lo, hi) -> tuple[_Best | None, int]:
    best: _Best | None = None
    count = 0
    for i in range(lo, hi):
        ks = np.flatnonzero(compat[i, i + 1 :])
        if ks.size == 0:
            continue
        ks += i + 1
        deltas = (d1[i] + d1[ks]) + c2[i, ks]
        a = int(np.argmin(deltas))
        count += ks.size
        best = _merge(best, (float(deltas[a]), (i, int(ks[a]))))
    return best, count


def _eval_size3_chunk(d1, c2, compat, bi, bj, lo, hi) -> tuple[_Best | None, int]:
    best: _Best | None = None
    count = 0
    for b in range(lo, hi):
        i = int(bi[b])
        j = int(bj[b])
        tail = compat[i, j + 1 :] & compat[j, j + 1 :]
        ks = np.flatnonzero(tail)
        if ks.size == 0:
            continue
        ks += j + 1
        base2 = (d1[i] + d1[j]) + c2[i, j]
        deltas = ((base2 + d1[ks]) + c2[i, ks]) + c2[j, ks]
        a = int(np.argmin(deltas))
        count += ks.size
        best = _merge(best, (float(deltas[a]), (i, j, int(ks[a]))))
    return best, count


def _eval_paper_chunk(d1, c2, trips, masks, pair_idx, lo, hi) -> tuple[_Best | None, int]:
    best: _Best | None = None
    count = 0
    for a in range(lo, hi):
        rest = np.flatnonzero((masks[a + 1 :] & int(masks[a])) == 0)
        if rest.size == 0:
            continue
        rest += a + 1
        t1 = trips[a]
        t2 = trips[rest]
        lo_l = np.minimum(t1, t2)
        hi_l = np.maximum(t1, t2)
        p = pair_idx[lo_l, hi_l]
        p.sort(axis=1)
        pi, pj, pk = p[:, 0], p[:, 1], p[:, 2]
        deltas = (((d1[pi] + d1[pj]) + c2[pi, pj]) + d1[pk]) + c2[pi, pk] + c2[pj, pk]
        count += rest.size
        m = deltas.min()
        for t in np.flatnonzero(deltas == m):
            best = _merge(best, (float(m), (int(pi[t]), int(pj[t]), int(pk[t]))))
    return best, count


def _search_chunk(args) -> tuple[_Best | None, int]:
    kind, payload, lo, hi = args
    if kind == "size2":
        return _eval_size2_chunk(*payload, lo, hi)
    if kind == "size3":
        return _eval_size3_chunk(*payload, lo, hi)
    if kind == "paper":
        return _eval_paper_chunk(*payload, lo, hi)
    raise ValueError(f"unknown chunk kind {kind!r}")


def _run_chunks(kind, payload, n_blocks, workers) -> tuple[_Best | None, int]:
    if workers <= 1 or n_blocks < 2:
        return _search_chunk((kind, payload, 0, n_blocks))
    bounds = np.linspace(0, n_blocks, min(workers, n_blocks) + 1).astype(int)
    tasks = [(kind, payload, int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if a < b]
    ctx = multiprocessing.get_context("fork" if "fork" in multiprocessing.get_all_start_methods() else None)
    best: _Best | None = None
    count = 0
    with ProcessPoolExecutor(max_workers=len(tasks), mp_context=ctx) as pool:
        for chunk_best, chunk_count in pool.map(_search_chunk, tasks):
            best = _merge(best, chunk_best)
            count += chunk_count
    return best, count


# ---------------------------------------------------------------------------
# public API


def enumerate_swapsets(n: int, mode: str = "canonical"):
    """Yield every candidate SwapSet in deterministic search order.

    Canonical order is lexicographic over canonical encodings within one
    size. Triplet mode yields one (already canonicalized) SwapSet per
    unordered pair of disjoint letter triplets.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if mode == "paper":
        if n != 3:
            raise ValueError("triplet mode is defined only for n=3")
        trips, masks = _triplet_space()
        n_trips = trips.shape[0]
        for a in range(n_trips):
            t1 = trips[a]
            for b in range(a + 1, n_trips):
                if masks[a] & masks[b]:
                    continue
                t2 = trips[b]
                pairs = tuple(
                    sorted((LETTERS[min(x, y)], LETTERS[max(x, y)]) for x, y in zip(t1, t2))
                )
                yield SwapSet(pairs)
        return
    if n not in (1, 2, 3):
        raise ValueError("n must be 1, 2 or 3")
    pairs, _, _, _, compat = _pair_space()
    letter_pairs = tuple((LETTERS[a], LETTERS[b]) for a, b in pairs)
    if n == 1:
        for p in letter_pairs:
            yield SwapSet((p,))
        return
    if n == 2:
        for i in range(_N_PAIRS):
            for j in np.flatnonzero(compat[i, i + 1 :]) + (i + 1):
                yield SwapSet((letter_pairs[i], letter_pairs[int(j)]))
        return
    bi, bj = _blocks3()
    for i, j in zip(bi, bj):
        tail = compat[i, j + 1 :] & compat[j, j + 1 :]
        for k in np.flatnonzero(tail) + (j + 1):
            yield SwapSet((letter_pairs[int(i)], letter_pairs[int(j)], letter_pairs[int(k)]))


def swap_count(n: int, mode: str = "canonical") -> int:
    """Closed-form candidate count for one search size."""
    if mode == "paper":
        if n != 3:
            raise ValueError("triplet mode is defined only for n=3")
        return _N_TRIPLETS * math.comb(23, 3) // 2
    total = 1
    for k in range(n):
        total *= math.comb(26 - 2 * k, 2)
    return total // math.factorial(n)


def optimize(g: KeyboardGeometry, stats: BigramStats, cfg: SearchConfig = SearchConfig()) -> OptimizationResult:
    """Exhaustively search swap sets and return the cheapest layout found.

    Ties are broken toward the lexicographically smallest canonical
    encoding, so the result does not depend on worker count. The winning
    cost is recomputed from scratch before being reported.
    """
    if stats.is_empty:
        raise ValueError("cannot optimize over empty bigram stats")
    t0 = time.perf_counter()
    base = qwerty_layout()
    base_cost = stats_cost(g, base, stats, cfg.model)
    if not base_cost > 0.0:
        raise ValueError("base layout cost is zero; improvement rate is undefined")
    d1, c2 = _build_delta_tables(g, stats, base, base_cost, cfg.model)
    pairs, _, _, pair_idx, compat = _pair_space()

    best: _Best | None = None
    candidates = 0
    raw_pairs: int | None = None

    if cfg.mode == "paper":
        trips, masks = _triplet_space()
        raw_pairs = _N_TRIPLETS * (_N_TRIPLETS - 1)
        payload = (d1, c2, trips, masks, pair_idx)
        best, candidates = _run_chunks("paper", payload, trips.shape[0], cfg.workers)
    else:
        sizes = range(0, cfg.n_swap_pairs + 1) if cfg.cumulative else (cfg.n_swap_pairs,)
        for size in sizes:
            if size == 0:
                size_best, n_cand = (0.0, ()), 1
            elif size == 1:
                size_best, n_cand = _eval_size1(d1)
            elif size == 2:
                size_best, n_cand = _run_chunks("size2", (d1, c2, compat), _N_PAIRS, cfg.workers)
            else:
                bi, bj = _blocks3()
                payload = (d1, c2, compat, bi, bj)
                size_best, n_cand = _run_chunks("size3", payload, bi.shape[0], cfg.workers)
            candidates += n_cand
            best = _merge(best, size_best)

    assert best is not None
    _, idx = best
    swaps = SwapSet(tuple((LETTERS[pairs[p][0]], LETTERS[pairs[p][1]]) for p in idx))
    best_cost = stats_cost(g, apply_swaps(base, swaps), stats, cfg.model)
    per_pct = 100.0 * (base_cost - best_cost) / base_cost
    return OptimizationResult(
        swaps=swaps,
        qwerty_cost_mm=base_cost,
        best_cost_mm=best_cost,
        per_pct=per_pct,
        candidates=candidates,
        mode=cfg.mode,
        cumulative=cfg.cumulative,
        wall_time_s=time.perf_counter() - t0,
        raw_ordered_pairs=raw_pairs,
    )


def verify_result(
    g: KeyboardGeometry,
    stats: BigramStats,
    result: OptimizationResult,
    model: EffortModel = DISTANCE_MODEL,
    rel_tol: float = 1e-9,
) -> bool:
    """Recompute both costs from scratch and audit the stored result."""
    if not result.swaps.is_canonical():
        return False
    base = qwerty_layout()
    q = stats_cost(g, base, stats, model)
    b = stats_cost(g, apply_swaps(base, result.swaps), stats, model)
    if not q > 0.0:
        return False
    per = 100.0 * (q - b) / q
    return (
        math.isclose(q, result.qwerty_cost_mm, rel_tol=rel_tol, abs_tol=0.0)
        and math.isclose(b, result.best_cost_mm, rel_tol=rel_tol, abs_tol=0.0)
        and math.isclose(per, result.per_pct, rel_tol=rel_tol, abs_tol=1e-12)
    )
