"""Security of partial problems and the minimal securing informativeness.

``secures`` runs the mechanism once per distinct execution path: whenever the
algorithm needs a list entry beyond what the partial problem reveals, the
reader branches over every element that could sit there. Each path stands
for the set of completions agreeing with what it revealed, so checking every
path is the same as checking every completion, usually with far fewer runs.

``min_secure_info`` walks the truncation lattice in order of informativeness
(lexicographic among ties). Every failed candidate yields a counterexample
completion; all vectors revealing no more than that completion shares with
the base problem fail too and are dropped in one vectorised step.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .market import CountingMode, PartialProblem, Problem, TruncationVector, informativeness
from .mechanisms import MechanismId, check_preconditions, run, run_with_reader


class OutsideSupport(ValueError):
    """The target pair is not matched by the mechanism on the base problem."""


class ScaleLimit(RuntimeError):
    """The requested computation exceeds the configured budget."""


DEFAULT_PATH_BUDGET = 2_000_000
MAX_LATTICE_ROWS = 3_000_000


@dataclass(frozen=True)
class PairTarget:
    student: int
    school: int


@dataclass(frozen=True)
class SecureResult:
    nu: int
    witness: TruncationVector
    explored: int
    mode: CountingMode
    paths: int = 0
    counterexamples: int = 0


@dataclass
class Layout:
    """Slot view of a problem: which lists exist and which ones the search may vary."""

    problem: Problem
    shared: bool
    lists: list[tuple[int, ...]]
    sizes: list[int]
    searchable: list[bool]
    counted: list[bool]
    fixed: list[int]
    prio_slot: list[int] = field(default_factory=list)
    seq_slot: int | None = None

    @classmethod
    def build(cls, mech: MechanismId, problem: Problem, focal: int, mode: CountingMode, shared: bool | None = None):
        if shared is None:
            shared = mech.needs_common
        if shared and not problem.common_priority:
            raise ValueError("shared-priority layout needs a common-priority problem")
        n, m = problem.n, problem.m
        fams = mech.families
        lists, sizes, searchable, counted, fixed = [], [], [], [], []
        for i in range(n):
            lists.append(problem.prefs[i])
            sizes.append(m)
            own_fixed = i == focal and mode is CountingMode.EXCLUDE_OWN
            searchable.append("pref" in fams and not own_fixed)
            counted.append(not own_fixed)
            fixed.append(m if own_fixed else 0)
        prio_lists = [problem.priorities[0]] if shared else list(problem.priorities)
        first_prio = len(lists)
        for row in prio_lists:
            lists.append(row)
            sizes.append(n)
            searchable.append("prio" in fams)
            counted.append(True)
            fixed.append(0)
        prio_slot = [first_prio] * m if shared else [first_prio + o for o in range(m)]
        lists.append(problem.moveseq or ())
        sizes.append(n if problem.moveseq is not None else 0)
        searchable.append("seq" in fams and problem.moveseq is not None)
        counted.append(True)
        fixed.append(0)
        return cls(problem, shared, lists, sizes, searchable, counted, fixed, prio_slot, len(lists) - 1)

    def vector(self, flat: Sequence[int]) -> TruncationVector:
        return TruncationVector.from_flat(flat, self.problem.n)

    def flat(self, trunc: TruncationVector) -> tuple[int, ...]:
        return trunc.flat()

    def count(self, flat: Sequence[int]) -> int:
        return int(sum(v for v, c in zip(flat, self.counted) if c))


class _Brancher:
    """Replays a script of choices and records new branch points."""

    __slots__ = ("script", "sizes", "pos")

    def __init__(self, script: list[int], sizes: list[int]):
        self.script = script
        self.sizes = sizes
        self.pos = 0

    def choose(self, options: list[int]) -> int:
        if len(options) == 1:
            return options[0]
        k = self.pos
        if k == len(self.script):
            self.script.append(0)
            self.sizes.append(len(options))
        self.pos += 1
        return options[self.script[k]]


class LazyReader:
    """Reader over a partial problem that reveals entries on demand."""

    __slots__ = ("layout", "revealed", "brancher")

    def __init__(self, layout: Layout, prefix_lengths: Sequence[int], brancher: _Brancher):
        self.layout = layout
        self.revealed = [list(layout.lists[s][: prefix_lengths[s]]) for s in range(len(layout.lists))]
        self.brancher = brancher

    def _entry(self, slot: int, pos: int) -> int:
        rev = self.revealed[slot]
        if pos < len(rev):
            return rev[pos]
        # base order first, so the first path is the base problem itself
        taken = set(rev)
        options = [x for x in self.layout.lists[slot] if x not in taken]
        x = self.brancher.choose(options)
        rev.append(x)
        return x

    def best_school(self, i, available, cap):
        limit = self.layout.sizes[i] if cap is None else min(cap, self.layout.sizes[i])
        for pos in range(limit):
            o = self._entry(i, pos)
            if o in available:
                return o
        return None

    def best_student(self, o, candidates):
        slot = self.layout.prio_slot[o]
        for pos in range(self.layout.sizes[slot]):
            i = self._entry(slot, pos)
            if i in candidates:
                return i
        raise AssertionError("priority list exhausted without a candidate")

    def next_mover(self, remaining):
        slot = self.layout.seq_slot
        for pos in range(self.layout.sizes[slot]):
            i = self._entry(slot, pos)
            if i in remaining:
                return i
        raise AssertionError("moving sequence exhausted")


class OrderState:
    """What a path has learned about one strict list: a known prefix plus order facts.

    Elements outside the prefix carry a bitmask of the elements known to rank above them.
    """

    __slots__ = ("base", "prefix", "pos", "above")

    def __init__(self, base: tuple[int, ...], length: int):
        self.base = base
        self.prefix = base[:length]
        self.pos = {x: k for k, x in enumerate(self.prefix)}
        self.above = [0] * (max(base) + 1 if base else 0)

    def candidates(self, pool) -> list[int]:
        """Elements of ``pool`` that may still be its best, in base order."""
        pos = self.pos
        known = [x for x in pool if x in pos]
        if known:
            return [min(known, key=pos.__getitem__)]
        mask = 0
        for x in pool:
            mask |= 1 << x
        above = self.above
        return [x for x in self.base if mask >> x & 1 and not above[x] & mask]

    def settle(self, best: int, pool) -> None:
        if best in self.pos:
            return
        lower = 0
        for y in pool:
            if y != best:
                lower |= 1 << y
        gained = self.above[best] | 1 << best
        above = self.above
        for w in self.base:
            if lower >> w & 1 or above[w] & lower:
                above[w] |= gained

    def completion(self) -> tuple[int, ...]:
        """A linear extension of the facts, as close to the base order as possible."""
        out = list(self.prefix)
        placed = 0
        for x in out:
            placed |= 1 << x
        while len(out) < len(self.base):
            for x in self.base:
                if not placed >> x & 1 and self.above[x] & ~placed == 0:
                    out.append(x)
                    placed |= 1 << x
                    break
        return tuple(out)


class AnswerReader:
    """Reader that branches over possible query answers rather than list entries."""

    __slots__ = ("layout", "prefix_lengths", "states", "brancher", "adverse")

    def __init__(self, layout: Layout, prefix_lengths: Sequence[int], brancher: _Brancher, adverse=None):
        self.layout = layout
        self.prefix_lengths = prefix_lengths
        self.states: list[OrderState | None] = [None] * len(layout.lists)
        self.brancher = brancher
        self.adverse = adverse

    def _state(self, slot: int) -> OrderState:
        state = self.states[slot]
        if state is None:
            state = self.states[slot] = OrderState(self.layout.lists[slot], self.prefix_lengths[slot])
        return state

    def _ask(self, slot: int, pool) -> int:
        state = self._state(slot)
        options = state.candidates(pool)
        if len(options) > 1 and self.adverse is not None:
            options = self.adverse(slot, options)
        best = self.brancher.choose(options)
        state.settle(best, pool)
        return best

    def best_school(self, i, available, cap):
        if not available:
            return None
        return self._ask(i, available)

    def best_student(self, o, candidates):
        return self._ask(self.layout.prio_slot[o], candidates)

    def next_mover(self, remaining):
        return self._ask(self.layout.seq_slot, remaining)

    def surely_first(self, o, i, n):
        return self._state(self.layout.prio_slot[o]).candidates(range(n)) == [i]

    def lists(self) -> list[tuple[int, ...]]:
        return [self._state(s).completion() for s in range(len(self.states))]


def _adversary(layout: Layout, target: "PairTarget"):
    """Order branch options so rivals grab the target school and the focal student loses ties."""
    n = layout.problem.n
    focal, school = target.student, target.school

    def order(slot: int, options: list[int]) -> list[int]:
        if slot < n:
            if slot != focal and school in options:
                return [school] + [x for x in options if x != school]
            return options
        if focal in options:
            return [x for x in options if x != focal] + [focal]
        return options

    return order


def explore(mech: MechanismId, layout: Layout, prefix_lengths: Sequence[int], adverse=None, watch=None):
    """Yield (assignment, reader) for every execution path of a partial problem."""
    p = layout.problem
    script: list[int] = []
    sizes: list[int] = []
    while True:
        brancher = _Brancher(script, sizes)
        if mech.cap is None:
            reader = AnswerReader(layout, prefix_lengths, brancher, adverse)
        else:
            reader = LazyReader(layout, prefix_lengths, brancher)
        assign = run_with_reader(mech, reader, p.n, p.capacities, watch=watch)
        yield assign, reader
        while script and script[-1] + 1 >= sizes[-1]:
            script.pop()
            sizes.pop()
        if not script:
            return
        script[-1] += 1


def _complete(layout: Layout, reader) -> list[tuple[int, ...]]:
    if isinstance(reader, AnswerReader):
        return reader.lists()
    out = []
    for s, rev in enumerate(reader.revealed):
        taken = set(rev)
        out.append(tuple(rev) + tuple(x for x in layout.lists[s] if x not in taken))
    return out


def _agreement(layout: Layout, lists: list[tuple[int, ...]]) -> np.ndarray:
    agree = np.zeros(len(lists), dtype=np.int16)
    for s, row in enumerate(lists):
        base = layout.lists[s]
        k = 0
        while k < len(row) and row[k] == base[k]:
            k += 1
        agree[s] = k
    return agree


@dataclass
class SecureCheck:
    secure: bool
    paths: int
    counterexample: list[tuple[int, ...]] | None = None  # per-slot lists of a failing completion


def check_secure(
    mech: MechanismId,
    layout: Layout,
    flat: Sequence[int],
    target: PairTarget,
    budget: int = DEFAULT_PATH_BUDGET,
    adversarial: bool = True,
) -> SecureCheck:
    paths = 0
    for assign, reader in explore(
        mech, layout, flat, _adversary(layout, target) if adversarial else None, watch=target.student
    ):
        paths += 1
        if assign[target.student] != target.school:
            return SecureCheck(False, paths, _complete(layout, reader))
        if paths > budget and layout.problem.n >= 5:
            raise ScaleLimit(f"more than {budget} execution paths for one candidate at n={layout.problem.n}")
    return SecureCheck(True, paths)


def secures(mech: MechanismId, partial: PartialProblem, target: PairTarget) -> bool:
    """Does every completion of ``partial`` assign the target pair under ``mech``?"""
    layout = Layout.build(mech, partial.base, target.student, CountingMode.INCLUDE_OWN, partial.trunc.shared)
    check_preconditions(mech, partial.base)
    return check_secure(mech, layout, partial.trunc.flat(), target).secure


def secures_brute(mech: MechanismId, partial: PartialProblem, target: PairTarget) -> bool:
    """Reference check over the explicit completion stream."""
    from .market import completions

    for problem in completions(partial):
        if run(mech, problem)[target.student] != target.school:
            return False
    return True


def _lattice(layout: Layout) -> tuple[np.ndarray, np.ndarray]:
    key = (tuple(layout.sizes), tuple(layout.searchable), tuple(layout.counted), tuple(layout.fixed))
    if key not in _LATTICES:
        _LATTICES[key] = _build_lattice(layout)
    return _LATTICES[key]


_LATTICES: dict = {}


def _build_lattice(layout: Layout) -> tuple[np.ndarray, np.ndarray]:
    ranges = []
    for s in range(len(layout.lists)):
        if layout.searchable[s]:
            ranges.append(range(layout.sizes[s] + 1))
        else:
            ranges.append((layout.fixed[s],))
    rows = 1
    for r in ranges:
        rows *= len(r)
    if rows > MAX_LATTICE_ROWS:
        raise ScaleLimit(f"truncation lattice has {rows} vectors, above the limit {MAX_LATTICE_ROWS}")
    grid = np.array(list(itertools.product(*ranges)), dtype=np.int16).reshape(rows, len(ranges))
    counted = np.array(layout.counted, dtype=np.int32)
    info = grid.astype(np.int32) @ counted
    # order by informativeness, ties lexicographic (product order is already lexicographic)
    order = np.argsort(info, kind="stable")
    grid, info = grid[order], info[order]
    grid.flags.writeable = False
    info.flags.writeable = False
    return grid, info


def _require_target(mech: MechanismId, problem: Problem, target: PairTarget) -> None:
    check_preconditions(mech, problem)
    got = run(mech, problem)[target.student]
    if got != target.school:
        raise OutsideSupport(
            f"outside support: {mech} assigns student {problem.student_name(target.student)} "
            f"to {problem.school_name(got) if got >= 0 else 'herself'}, not {problem.school_name(target.school)}"
        )


def min_secure_info(
    mech: MechanismId,
    problem: Problem,
    target: PairTarget,
    mode: CountingMode = CountingMode.EXCLUDE_OWN,
    *,
    shared: bool | None = None,
    budget: int = DEFAULT_PATH_BUDGET,
) -> SecureResult:
    """Smallest informativeness of a partial problem that secures the target."""
    _require_target(mech, problem, target)
    layout = Layout.build(mech, problem, target.student, mode, shared)
    grid, info = _lattice(layout)
    alive = np.ones(len(grid), dtype=bool)
    explored = paths = cex = 0
    idx = 0
    while True:
        # rows before idx are already ruled out
        ahead = np.flatnonzero(alive[idx:])
        if len(ahead) == 0:
            raise AssertionError("full information failed to secure the target")
        idx += int(ahead[0])
        flat = tuple(int(x) for x in grid[idx])
        check = check_secure(mech, layout, flat, target, budget)
        explored += 1
        paths += check.paths
        if check.secure:
            return SecureResult(int(info[idx]), layout.vector(flat), explored, mode, paths, cex)
        cex += 1
        agree = _agreement(layout, check.counterexample)
        alive[idx:] &= ~np.all(grid[idx:] <= agree, axis=1)


def minimal_witnesses(
    mech: MechanismId,
    problem: Problem,
    target: PairTarget,
    mode: CountingMode = CountingMode.EXCLUDE_OWN,
    *,
    shared: bool | None = None,
) -> list[TruncationVector]:
    """Every securing vector whose single-coordinate decrements all fail."""
    _require_target(mech, problem, target)
    layout = Layout.build(mech, problem, target.student, mode, shared)
    grid, _ = _lattice(layout)
    status = np.zeros(len(grid), dtype=np.int8)  # 0 unknown, 1 secure, -1 fails
    for idx in range(len(grid)):
        if status[idx]:
            continue
        flat = tuple(int(x) for x in grid[idx])
        check = check_secure(mech, layout, flat, target)
        if check.secure:
            status[np.all(grid >= grid[idx], axis=1) & (status == 0)] = 1
        else:
            agree = _agreement(layout, check.counterexample)
            status[np.all(grid <= agree, axis=1)] = -1
    secure_set = {tuple(int(x) for x in row) for row, st in zip(grid, status) if st == 1}
    out = []
    for flat in sorted(secure_set, key=lambda f: (layout.count(f), f)):
        if all(pred not in secure_set for pred in _predecessors(layout, flat)):
            out.append(layout.vector(flat))
    return out


def _predecessors(layout: Layout, flat: Sequence[int]) -> Iterator[tuple[int, ...]]:
    for s, v in enumerate(flat):
        if layout.searchable[s] and v > 0:
            yield tuple(flat[:s]) + (v - 1,) + tuple(flat[s + 1 :])


def locally_necessary(
    mech: MechanismId,
    problem: Problem,
    target: PairTarget,
    trunc: TruncationVector,
    mode: CountingMode = CountingMode.EXCLUDE_OWN,
) -> list[tuple[int, bool]]:
    """For each decrementable slot, whether the decrement still secures (should be False)."""
    layout = Layout.build(mech, problem, target.student, mode, trunc.shared)
    flat = trunc.flat()
    out = []
    for s, v in enumerate(flat):
        if v == 0 or not layout.counted[s]:
            continue
        lower = tuple(flat[:s]) + (v - 1,) + tuple(flat[s + 1 :])
        out.append((s, check_secure(mech, layout, lower, target).secure))
    return out


def brute_force_nu(
    mech: MechanismId,
    problem: Problem,
    target: PairTarget,
    mode: CountingMode = CountingMode.EXCLUDE_OWN,
    *,
    shared: bool | None = None,
) -> tuple[int, TruncationVector]:
    """Scan the whole lattice with explicit completions; for small cross-checks only."""
    _require_target(mech, problem, target)
    layout = Layout.build(mech, problem, target.student, mode, shared)
    grid, info = _lattice(layout)
    for row, value in zip(grid, info):
        trunc = layout.vector(row)
        if secures_brute(mech, PartialProblem(problem, trunc), target):
            return int(value), trunc
    raise AssertionError("full information failed to secure the target")


def witness_informativeness(partial: PartialProblem, mode: CountingMode, focal: int) -> int:
    return informativeness(partial, mode, focal)
