"""IA, DA, TTC and SD plus their variants, and the axiom checkers.

Every mechanism reads a problem only through a :class:`Reader`: "best school
for ``i`` among a set", "best student for ``o`` among a set" and "next mover
among a set". The secure engine substitutes a reader that reveals list
entries lazily, so the exact same code drives both concrete runs and the
branching search over completions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Protocol, Sequence

from .market import SELF, Matching, Problem

BASES = ("IA", "DA", "TTC", "SD", "SD_COMMON", "IA_TRIANGLE")

# list families each mechanism reads; the others never affect its outcome
FAMILIES = {
    "IA": ("pref", "prio"),
    "DA": ("pref", "prio"),
    "TTC": ("pref", "prio"),
    "SD": ("pref", "seq"),
    "SD_COMMON": ("pref", "prio"),
    "IA_TRIANGLE": ("pref",),
}

CLI_NAMES = {
    "ia": "IA",
    "da": "DA",
    "ttc": "TTC",
    "sd": "SD",
    "sd-common": "SD_COMMON",
    "ia-triangle": "IA_TRIANGLE",
}


class MechanismError(ValueError):
    pass


@dataclass(frozen=True)
class MechanismId:
    base: str
    cap: int | None = None

    def __post_init__(self):
        if self.base not in BASES:
            raise MechanismError(f"unknown mechanism {self.base!r}")
        if self.cap is not None and self.cap < 1:
            raise MechanismError("length cap must be positive")

    @classmethod
    def parse(cls, name: str, cap: int | None = None) -> "MechanismId":
        key = name.lower()
        if key in CLI_NAMES:
            return cls(CLI_NAMES[key], cap)
        return cls(name.upper(), cap)

    @property
    def families(self) -> tuple[str, ...]:
        return FAMILIES[self.base]

    @property
    def needs_common(self) -> bool:
        return self.base == "SD_COMMON"

    def __str__(self) -> str:
        label = {"SD_COMMON": "SD^≻", "IA_TRIANGLE": "IA^▷"}.get(self.base, self.base)
        return f"{label}^{self.cap}" if self.cap else label


IA, DA, TTC, SD = (MechanismId(b) for b in ("IA", "DA", "TTC", "SD"))
SD_COMMON = MechanismId("SD_COMMON")
IA_TRIANGLE = MechanismId("IA_TRIANGLE")


def cap_length(mech: MechanismId, e: int, m: int) -> MechanismId:
    """The same mechanism run on every preference list cut to its top ``e`` entries."""
    if not 0 < e < m:
        raise MechanismError(f"length cap must satisfy 0 < e < m, got e={e}, m={m}")
    return MechanismId(mech.base, e)


class Reader(Protocol):
    def best_school(self, i: int, available: Sequence[int] | set, cap: int | None) -> int | None: ...

    def best_student(self, o: int, candidates: Sequence[int] | set) -> int: ...

    def next_mover(self, remaining: Sequence[int] | set) -> int: ...


class ProblemReader:
    """Reads a concrete problem."""

    __slots__ = ("p",)

    def __init__(self, problem: Problem):
        self.p = problem

    def best_school(self, i, available, cap):
        row = self.p.prefs[i] if cap is None else self.p.prefs[i][:cap]
        for o in row:
            if o in available:
                return o
        return None

    def best_student(self, o, candidates):
        for i in self.p.priorities[o]:
            if i in candidates:
                return i
        raise MechanismError(f"no candidate in priority list of school {o}")

    def next_mover(self, remaining):
        if self.p.moveseq is None:
            raise MechanismError("serial dictatorship needs a moving sequence")
        for i in self.p.moveseq:
            if i in remaining:
                return i
        raise MechanismError("moving sequence exhausted")


class TriangleReader:
    """Replaces every school's priority with the order induced by the last student's list."""

    __slots__ = ("inner", "n")

    def __init__(self, inner: Reader, n: int):
        self.inner = inner
        self.n = n

    def best_school(self, i, available, cap):
        return self.inner.best_school(i, available, cap)

    def best_student(self, o, candidates):
        last = self.n - 1
        proxies = {j for j in candidates if j != last}
        if not proxies:
            return last
        # school j stands in for student j among the first n-1 schools
        return self.inner.best_school(last, proxies, None)

    def next_mover(self, remaining):
        return self.inner.next_mover(remaining)


class CommonMoverReader:
    """Serial dictatorship along the common priority list."""

    __slots__ = ("inner",)

    def __init__(self, inner: Reader):
        self.inner = inner

    def best_school(self, i, available, cap):
        return self.inner.best_school(i, available, cap)

    def best_student(self, o, candidates):
        return self.inner.best_student(o, candidates)

    def next_mover(self, remaining):
        return self.inner.best_student(0, remaining)


def induced_common_order(last_pref: Sequence[int], n: int) -> tuple[int, ...]:
    """Priority order over students induced by the last student's preference list.

    The first ``n - 1`` schools stand in for students ``0..n-2`` (school ``j``
    for student ``j``); the last student always comes last.
    """
    if n < 2:
        raise MechanismError("need at least two students")
    return tuple(o for o in last_pref if o < n - 1) + (n - 1,)


# ---------------------------------------------------------------------------
# algorithms


def _top_k(reader: Reader, o: int, pool: set[int], k: int) -> list[int]:
    chosen = []
    pool = set(pool)
    while pool and len(chosen) < k:
        best = reader.best_student(o, pool)
        chosen.append(best)
        pool.discard(best)
    return chosen


def _unbeatable(reader, o: int, i: int, n: int) -> bool:
    """Whether ``i`` is already known to outrank everyone else at ``o``."""
    probe = getattr(reader, "surely_first", None)
    return probe is not None and probe(o, i, n)


class _Settled(Exception):
    pass


class _WatchedAssignment(list):
    """Assignment list that stops the run once a watched student is placed for good."""

    def __init__(self, n: int, watch: int):
        super().__init__([SELF] * n)
        self.watch = watch

    def __setitem__(self, i, o):
        super().__setitem__(i, o)
        if i == self.watch:
            raise _Settled(o)


def _fresh(n: int, watch: int | None) -> list[int]:
    return [SELF] * n if watch is None else _WatchedAssignment(n, watch)


def _ia(reader, n, caps, cap, trace, watch=None):
    assign = _fresh(n, watch)
    seats = list(caps)
    students = set(range(n))
    schools = {o for o in range(len(caps)) if seats[o] > 0}
    step = 0
    while students:
        step += 1
        proposals: dict[int, set[int]] = {}
        for i in sorted(students):
            o = reader.best_school(i, schools, cap)
            if o is None:
                students.discard(i)
                if trace is not None:
                    trace.append(f"IA step {step}: student {i + 1} has exhausted her list, self-matched")
                continue
            proposals.setdefault(o, set()).add(i)
        for o in sorted(proposals):
            accepted = _top_k(reader, o, proposals[o], seats[o])
            for i in accepted:
                assign[i] = o
                students.discard(i)
            seats[o] -= len(accepted)
            if seats[o] == 0:
                schools.discard(o)
            if trace is not None:
                names = ", ".join(str(i + 1) for i in sorted(proposals[o]))
                got = ", ".join(str(i + 1) for i in accepted)
                trace.append(f"IA step {step}: school {o} receives {{{names}}}, admits {got} permanently")
    return assign


def _da(reader, n, caps, cap, trace, watch=None):
    m = len(caps)
    rejected: list[set[int]] = [set() for _ in range(n)]
    held: list[set[int]] = [set() for _ in range(m)]
    free = set(range(n))
    assign = [SELF] * n
    step = 0
    while free:
        step += 1
        new: dict[int, set[int]] = {}
        for i in sorted(free):
            available = set(range(m)) - rejected[i]
            o = reader.best_school(i, available, cap)
            if o is None:
                if trace is not None:
                    trace.append(f"DA step {step}: student {i + 1} has exhausted her list, self-matched")
                continue
            new.setdefault(o, set()).add(i)
        free = set()
        for o in sorted(new):
            pool = held[o] | new[o]
            keep = set(_top_k(reader, o, pool, caps[o]))
            out = pool - keep
            held[o] = keep
            for i in out:
                rejected[i].add(o)
                free.add(i)
            if trace is not None:
                names = ", ".join(str(i + 1) for i in sorted(new[o]))
                msg = f"DA step {step}: school {o} receives {{{names}}}, holds {sorted(j + 1 for j in keep)}"
                if out:
                    msg += f", rejects {sorted(j + 1 for j in out)}"
                trace.append(msg)
        if watch is not None:
            for o in range(m):
                if watch in held[o] and _unbeatable(reader, o, watch, n):
                    raise _Settled(o)
    for o in range(m):
        for i in held[o]:
            assign[i] = o
    return assign


def _ttc(reader, n, caps, cap, trace, watch=None):
    assign = _fresh(n, watch)
    seats = list(caps)
    students = set(range(n))
    schools = {o for o in range(len(caps)) if seats[o] > 0}
    step = 0
    while students:
        step += 1
        points: dict[int, int] = {}
        for i in sorted(students):
            o = reader.best_school(i, schools, cap)
            if o is None:
                students.discard(i)
                if trace is not None:
                    trace.append(f"TTC step {step}: student {i + 1} has exhausted her list, self-matched")
                continue
            points[i] = o
        if not students:
            break
        # only schools someone points at can sit on a cycle
        owner = {o: reader.best_student(o, students) for o in sorted(set(points.values()))}
        # walk the student -> school -> student map; every walk ends on a cycle
        in_cycle: set[int] = set()
        seen: set[int] = set()
        for start in sorted(points):
            path = []
            i = start
            while i not in seen:
                seen.add(i)
                path.append(i)
                i = owner[points[i]]
            if i in path:
                in_cycle.update(path[path.index(i) :])
        for i in sorted(in_cycle):
            o = points[i]
            assign[i] = o
            seats[o] -= 1
            if seats[o] == 0:
                schools.discard(o)
        students -= in_cycle
        if trace is not None:
            pairs = ", ".join(f"{i + 1}→{points[i]}" for i in sorted(in_cycle))
            trace.append(f"TTC step {step}: trading cycles clear {pairs}")
    return assign


def _ttc_chain(reader, n, caps, cap, trace, watch):
    """TTC that clears only the cycle reached from ``watch``, one at a time.

    Cycles stay cycles when other cycles clear, so the order of clearing does
    not change the outcome. Following the watched student's chain reads far
    fewer lists than clearing every cycle of a round.
    """
    assign = [SELF] * n
    seats = list(caps)
    students = set(range(n))
    schools = {o for o in range(len(caps)) if seats[o] > 0}
    while True:
        order: dict[int, int] = {}
        chain: list[tuple[int, int]] = []
        i = watch
        while i not in order:
            o = reader.best_school(i, schools, cap)
            if o is None:
                break
            order[i] = len(chain)
            chain.append((i, o))
            i = reader.best_student(o, students)
        else:
            for j, o in chain[order[i] :]:
                if j == watch:
                    raise _Settled(o)
                assign[j] = o
                students.discard(j)
                seats[o] -= 1
                if seats[o] == 0:
                    schools.discard(o)
            continue
        if i == watch:
            return assign
        students.discard(i)


def _sd(reader, n, caps, cap, trace, watch=None):
    assign = _fresh(n, watch)
    seats = list(caps)
    schools = {o for o in range(len(caps)) if seats[o] > 0}
    remaining = set(range(n))
    for step in range(1, n + 1):
        i = reader.next_mover(remaining)
        remaining.discard(i)
        o = reader.best_school(i, schools, cap)
        if o is not None:
            assign[i] = o
            seats[o] -= 1
            if seats[o] == 0:
                schools.discard(o)
        if trace is not None:
            got = "nothing (self-matched)" if o is None else f"school {o}"
            trace.append(f"SD step {step}: dictator {i + 1} picks {got}")
    return assign


_ALGOS = {"IA": _ia, "DA": _da, "TTC": _ttc, "SD": _sd, "SD_COMMON": _sd, "IA_TRIANGLE": _ia}


def run_with_reader(
    mech: MechanismId, reader: Reader, n: int, caps: Sequence[int], trace=None, watch: int | None = None
) -> list[int]:
    """Run the mechanism through ``reader``.

    With ``watch`` set, mechanisms whose assignments are final when made stop as
    soon as that student is placed; only the watched entry of the result is then
    meaningful. DA holds are tentative, so DA stops only once the watched
    student holds a seat and the reader can vouch nobody outranks her there.
    """
    if mech.base == "IA_TRIANGLE":
        reader = TriangleReader(reader, n)
    elif mech.base == "SD_COMMON":
        reader = CommonMoverReader(reader)
    if watch is None:
        return _ALGOS[mech.base](reader, n, caps, mech.cap, trace)
    algo = _ttc_chain if mech.base == "TTC" and trace is None else _ALGOS[mech.base]
    try:
        return algo(reader, n, caps, mech.cap, trace, watch)
    except _Settled as stop:
        out = [SELF] * n
        out[watch] = stop.args[0]
        return out


def check_preconditions(mech: MechanismId, problem: Problem) -> None:
    if mech.base == "SD" and problem.moveseq is None:
        raise MechanismError("serial dictatorship needs a moving sequence")
    if mech.base == "SD_COMMON" and not problem.common_priority:
        raise MechanismError("SD^≻ needs a common-priority problem")
    if mech.base == "IA_TRIANGLE" and problem.m < problem.n - 1:
        raise MechanismError("IA^▷ needs at least n-1 schools")
    if mech.cap is not None and mech.cap >= problem.m:
        raise MechanismError("length cap must be below the number of schools")


def run(mech: MechanismId, problem: Problem, trace: list[str] | None = None) -> Matching:
    check_preconditions(mech, problem)
    assign = run_with_reader(mech, ProblemReader(problem), problem.n, problem.capacities, trace)
    if trace is not None:
        trace[:] = [_rename_schools(line, problem) for line in trace]
    return Matching.from_assign(assign, problem.m)


def _rename_schools(line: str, problem: Problem) -> str:
    import re

    line = re.sub(r"school (\d+)", lambda mt: f"school {problem.school_name(int(mt.group(1)))}", line)
    return re.sub(r"(\d+)→(\d+)", lambda mt: f"{mt.group(1)}→{problem.school_name(int(mt.group(2)))}", line)


def run_ia(problem: Problem, trace=None) -> Matching:
    return run(IA, problem, trace)


def run_da(problem: Problem, trace=None) -> Matching:
    return run(DA, problem, trace)


def run_ttc(problem: Problem, trace=None) -> Matching:
    return run(TTC, problem, trace)


def run_sd(problem: Problem, trace=None, *, common: bool = False) -> Matching:
    return run(SD_COMMON if common else SD, problem, trace)


def run_ia_triangle(problem: Problem, trace=None) -> Matching:
    return run(IA_TRIANGLE, problem, trace)


# ---------------------------------------------------------------------------
# axiom checkers


def _prefers(problem: Problem, i: int, a: int, b: int) -> bool:
    """Student ``i`` strictly prefers ``a`` to ``b`` (self-matching is worst)."""
    if a == SELF:
        return False
    if b == SELF:
        return True
    row = problem.prefs[i]
    return row.index(a) < row.index(b)


def check_pareto_efficient(problem: Problem, matching: Matching) -> bool:
    """No improving trade cycle and no student wanting a vacant seat."""
    x = matching.assign
    n = problem.n
    spare = {o for o in range(problem.m) if len(matching.rosters[o]) < problem.capacities[o]}
    if any(_prefers(problem, i, o, x[i]) for i in range(n) for o in spare):
        return False
    envy = {i: [j for j in range(n) if x[j] != SELF and x[j] != x[i] and _prefers(problem, i, x[j], x[i])] for i in range(n)}
    state = [0] * n  # 0 unvisited, 1 on stack, 2 done

    def has_cycle(v):
        state[v] = 1
        for w in envy[v]:
            if state[w] == 1 or (state[w] == 0 and has_cycle(w)):
                return True
        state[v] = 2
        return False

    return not any(state[v] == 0 and has_cycle(v) for v in range(n))


def pareto_efficient_brute(problem: Problem, matching: Matching) -> bool:
    """Enumerate every feasible assignment; used to cross-check the cycle test."""
    x = matching.assign
    options = list(range(problem.m)) + [SELF]
    for y in itertools.product(options, repeat=problem.n):
        if tuple(y) == tuple(x):
            continue
        counts = [0] * problem.m
        for o in y:
            if o != SELF:
                counts[o] += 1
        if any(c > q for c, q in zip(counts, problem.capacities)):
            continue
        weakly = all(y[i] == x[i] or _prefers(problem, i, y[i], x[i]) for i in range(problem.n))
        strictly = any(_prefers(problem, i, y[i], x[i]) for i in range(problem.n))
        if weakly and strictly:
            return False
    return True


def check_fhr(problem: Problem, matching: Matching) -> bool:
    """Favoring higher ranks: nobody ranking ``o`` lower holds it while ``i`` envies it."""
    x = matching.assign
    for i in range(problem.n):
        for o in range(problem.m):
            if not _prefers(problem, i, o, x[i]):
                continue
            r_i = problem.rank(o, i)
            if any(problem.rank(o, j) > r_i for j in matching.rosters[o]):
                return False
    return True


def check_stable(problem: Problem, matching: Matching) -> bool:
    x = matching.assign
    for j in range(problem.n):
        for o in range(problem.m):
            if o == x[j] or not _prefers(problem, j, o, x[j]):
                continue
            roster = matching.rosters[o]
            if len(roster) < problem.capacities[o]:
                return False
            prio = problem.priorities[o]
            if any(prio.index(j) < prio.index(i) for i in roster):
                return False
    return True


def blocking_pairs(problem: Problem, matching: Matching) -> list[tuple[int, int]]:
    x = matching.assign
    out = []
    for j in range(problem.n):
        for o in range(problem.m):
            if o == x[j] or not _prefers(problem, j, o, x[j]):
                continue
            roster = matching.rosters[o]
            prio = problem.priorities[o]
            if len(roster) < problem.capacities[o] or any(prio.index(j) < prio.index(i) for i in roster):
                out.append((j, o))
    return out
