"""Whole-space evaluation of minimal securing informativeness for tiny markets.

For a fixed mechanism the entire problem space (every permutation in every
varied list) is enumerated once and the mechanism run on each problem. A
truncation vector then partitions the space into prefix classes; a class
secures the pair exactly when every member assigns it. One pass per vector
over the whole space gives the minimal securing informativeness of every
problem at once, without any search. This is the independent route used to
check the per-problem search and the symmetry-reduced sweeps.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .market import CountingMode, Problem, TruncationVector, canonical_key
from .mechanisms import MechanismId, run

SPACE_LIMIT = 300_000


@lru_cache(maxsize=None)
def _perms(k: int) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.permutations(range(k)))


@lru_cache(maxsize=None)
def _prefix_classes(k: int) -> np.ndarray:
    """``table[p, l]`` is the id of the length-``l`` prefix of permutation ``p``."""
    perms = _perms(k)
    table = np.zeros((len(perms), k + 1), dtype=np.int64)
    for length in range(k + 1):
        ids: dict[tuple[int, ...], int] = {}
        for p, perm in enumerate(perms):
            table[p, length] = ids.setdefault(perm[:length], len(ids))
    return table


def _n_classes(k: int, length: int) -> int:
    return math.factorial(k) // math.factorial(k - length)


@dataclass
class Space:
    """All problems of a given shape for one mechanism, with outcomes."""

    mech: MechanismId
    n: int
    m: int
    shared: bool
    slot_sizes: list[int]  # per slot: permutation size, 0 for a slot held fixed
    perm_idx: np.ndarray  # (problems, slots)
    assign: np.ndarray  # (problems, n)

    @property
    def size(self) -> int:
        return len(self.perm_idx)

    def problem(self, row: int) -> Problem:
        return _decode(self, self.perm_idx[row])

    def pref_first(self, i: int) -> np.ndarray:
        firsts = np.array([p[0] for p in _perms(self.m)])
        return firsts[self.perm_idx[:, i]]

    def pref_rank(self, i: int, o: int) -> np.ndarray:
        ranks = np.array([p.index(o) + 1 for p in _perms(self.m)])
        return ranks[self.perm_idx[:, i]]


def _slots(mech: MechanismId, n: int, m: int, shared: bool) -> list[int]:
    fams = mech.families
    sizes = [m if "pref" in fams else 0 for _ in range(n)]
    n_prio = 1 if shared else m
    sizes += [n if "prio" in fams else 0 for _ in range(n_prio)]
    sizes.append(n if "seq" in fams else 0)
    return sizes


def _decode(space: Space, row: np.ndarray) -> Problem:
    n, m = space.n, space.m
    sizes = space.slot_sizes
    lists = []
    for s, k in enumerate(sizes):
        lists.append(_perms(k)[row[s]] if k else None)
    prefs = tuple(lists[i] if lists[i] is not None else tuple(range(m)) for i in range(n))
    prio_lists = lists[n:-1]
    ident = tuple(range(n))
    if space.shared:
        common = prio_lists[0] if prio_lists[0] is not None else ident
        prios = (common,) * m
    else:
        prios = tuple(p if p is not None else ident for p in prio_lists)
    seq = lists[-1] if "seq" in space.mech.families else None
    return Problem(prefs, prios, (1,) * m, seq)


_SPACES: dict = {}


def build_space(mech: MechanismId, n: int = 3, m: int = 3, shared: bool = False, cache=None) -> Space:
    """Enumerate the space and run ``mech`` on every problem.

    ``cache`` is an optional :class:`infosize.cache.ResultCache`; it only
    saves mechanism runs and never changes a value.
    """
    key = (mech, n, m, shared)
    if key in _SPACES:
        space = _SPACES[key]
        if cache is not None:
            _fill(cache, space)
        return space
    sizes = _slots(mech, n, m, shared)
    counts = [math.factorial(k) if k else 1 for k in sizes]
    total = math.prod(counts)
    if total > SPACE_LIMIT:
        raise ValueError(f"problem space of {total} problems is too large for a whole-space sweep")
    perm_idx = np.array(list(itertools.product(*[range(c) for c in counts])), dtype=np.int64)
    perm_idx = perm_idx.reshape(total, len(sizes))
    space = Space(mech, n, m, shared, sizes, perm_idx, np.zeros((total, n), dtype=np.int8))
    label = str(mech)
    for r in range(total):
        problem = _decode(space, perm_idx[r])
        if cache is None:
            space.assign[r] = run(mech, problem).assign
            continue
        pkey = canonical_key(problem)
        hit = cache.get(label, pkey)
        if hit is None:
            hit = run(mech, problem).assign
            cache.put(label, pkey, hit)
        space.assign[r] = hit
    _SPACES[key] = space
    return space


def _fill(cache, space: Space) -> None:
    label = str(space.mech)
    for r in range(space.size):
        cache.put(label, canonical_key(_decode(space, space.perm_idx[r])), space.assign[r])


@dataclass
class SweepResult:
    nu: np.ndarray  # per problem; -1 outside the support of the pair
    witness: np.ndarray  # (problems, slots) flat truncation vector per problem
    support: np.ndarray  # bool mask


def sweep_nu(
    space: Space,
    student: int,
    school: int,
    mode: CountingMode = CountingMode.EXCLUDE_OWN,
    mask: np.ndarray | None = None,
) -> SweepResult:
    """Minimal securing informativeness of every problem in ``mask`` that assigns the pair."""
    ok = space.assign[:, student] == school
    support = ok if mask is None else ok & mask
    n = space.n
    ranges = []
    counted = []
    for s, k in enumerate(space.slot_sizes):
        own = s == student and s < n and mode is CountingMode.EXCLUDE_OWN
        if k == 0:
            ranges.append((0,))
        elif own:
            ranges.append((k,))
        else:
            ranges.append(range(k + 1))
        counted.append(not own)
    grid = np.array(list(itertools.product(*ranges)), dtype=np.int64)
    info = grid @ np.array(counted, dtype=np.int64)
    order = np.argsort(info, kind="stable")
    grid, info = grid[order], info[order]

    nu = np.full(space.size, -1, dtype=np.int64)
    witness = np.zeros((space.size, len(ranges)), dtype=np.int64)
    todo = support.copy()
    bad = (~ok).astype(np.float64)
    tables = {k: _prefix_classes(k) for k in set(space.slot_sizes) if k}
    for vec, value in zip(grid, info):
        key = np.zeros(space.size, dtype=np.int64)
        for s, k in enumerate(space.slot_sizes):
            if k == 0:
                continue
            length = int(vec[s])
            key = key * _n_classes(k, length) + tables[k][space.perm_idx[:, s], length]
        fails = np.bincount(key, weights=bad)
        hit = todo & (fails[key] == 0)
        if hit.any():
            nu[hit] = value
            witness[hit] = vec
            todo &= ~hit
            if not todo.any():
                break
    return SweepResult(nu, witness, support)


def witness_vector(space: Space, flat) -> TruncationVector:
    return TruncationVector.from_flat(flat, space.n)
