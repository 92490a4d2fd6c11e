"""Problems, partial problems, matchings and the problem spaces they live in.

Students and schools are dense 0-based indices internally; display names are
kept alongside for I/O only and never take part in equality or hashing.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
import struct
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

SELF = -1  # assignment value for a self-matched student


class ProblemError(ValueError):
    """Raised by :func:`validate_problem` with every violated invariant."""

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class CountingMode(enum.Enum):
    INCLUDE_OWN = "own"
    EXCLUDE_OWN = "no-own"


@dataclass(frozen=True)
class Problem:
    prefs: tuple[tuple[int, ...], ...]
    priorities: tuple[tuple[int, ...], ...]
    capacities: tuple[int, ...]
    moveseq: tuple[int, ...] | None = None
    student_names: tuple[str, ...] = field(default=(), compare=False, repr=False)
    school_names: tuple[str, ...] = field(default=(), compare=False, repr=False)
    # clone school index -> original school index, set by clone_expand
    clone_origin: tuple[int, ...] | None = field(default=None, compare=False, repr=False)

    @property
    def n(self) -> int:
        return len(self.prefs)

    @property
    def m(self) -> int:
        return len(self.priorities)

    def student_name(self, i: int) -> str:
        return self.student_names[i] if self.student_names else str(i + 1)

    def school_name(self, o: int) -> str:
        if self.school_names:
            return self.school_names[o]
        return "abcdefghijklmnopqrstuvwxyz"[o] if o < 26 else f"o{o + 1}"

    @property
    def common_priority(self) -> bool:
        return all(p == self.priorities[0] for p in self.priorities)

    def rank(self, o: int, i: int) -> int:
        """1-based position of school ``o`` in student ``i``'s list."""
        return self.prefs[i].index(o) + 1

    def replace(self, **changes) -> "Problem":
        values = {
            "prefs": self.prefs,
            "priorities": self.priorities,
            "capacities": self.capacities,
            "moveseq": self.moveseq,
            "student_names": self.student_names,
            "school_names": self.school_names,
            "clone_origin": self.clone_origin,
        }
        values.update(changes)
        return Problem(**values)

    def to_json(self) -> dict:
        s = [self.student_name(i) for i in range(self.n)]
        o = [self.school_name(k) for k in range(self.m)]
        data = {
            "students": s,
            "schools": o,
            "capacities": {o[k]: self.capacities[k] for k in range(self.m)},
            "prefs": {s[i]: [o[k] for k in self.prefs[i]] for i in range(self.n)},
            "priorities": {o[k]: [s[i] for i in self.priorities[k]] for k in range(self.m)},
        }
        if self.moveseq is not None:
            data["moveseq"] = [s[i] for i in self.moveseq]
        return data


def make_problem(
    prefs: Sequence[Sequence[int]],
    priorities: Sequence[Sequence[int]] | None = None,
    capacities: Sequence[int] | None = None,
    moveseq: Sequence[int] | None = None,
    *,
    common: Sequence[int] | None = None,
) -> Problem:
    """Build a problem from 0-based lists without the full validation pass.

    ``common`` gives one priority list shared by every school.
    """
    m = len(prefs[0])
    if common is not None:
        priorities = [common] * m
    if priorities is None:
        priorities = [tuple(range(len(prefs)))] * m
    return Problem(
        prefs=tuple(tuple(p) for p in prefs),
        priorities=tuple(tuple(p) for p in priorities),
        capacities=tuple(capacities) if capacities is not None else (1,) * len(priorities),
        moveseq=tuple(moveseq) if moveseq is not None else None,
    )


def validate_problem(raw: dict) -> Problem:
    """Check a problem description in the JSON schema and map names to ids."""
    errors: list[str] = []
    students = list(raw.get("students", []))
    schools = list(raw.get("schools", []))
    if len(set(students)) != len(students):
        errors.append("duplicate student name")
    if len(set(schools)) != len(schools):
        errors.append("duplicate school name")
    sid = {s: k for k, s in enumerate(students)}
    oid = {o: k for k, o in enumerate(schools)}
    n, m = len(students), len(schools)

    caps_raw = raw.get("capacities", {})
    capacities = []
    for o in schools:
        q = caps_raw.get(o, 1)
        if not isinstance(q, int) or q < 1:
            errors.append(f"capacity of {o} must be a positive integer")
            q = 1
        capacities.append(q)

    def check_list(kind: str, owner, seq, universe: dict) -> tuple[int, ...]:
        seq = list(seq)
        if len(set(seq)) != len(seq):
            errors.append(f"duplicate in {kind} list of {owner}")
        unknown = [x for x in seq if x not in universe]
        if unknown:
            errors.append(f"unknown entries {unknown} in {kind} list of {owner}")
        missing = [x for x in universe if x not in seq]
        if missing:
            errors.append(f"{kind} list of {owner} is missing {missing}")
        return tuple(universe[x] for x in seq if x in universe)

    prefs_raw = raw.get("prefs", {})
    prio_raw = raw.get("priorities", {})
    prefs, priorities = [], []
    for s in students:
        if s not in prefs_raw:
            errors.append(f"missing preference list for {s}")
            prefs.append(())
        else:
            prefs.append(check_list("preference", s, prefs_raw[s], oid))
    for o in schools:
        if o not in prio_raw:
            errors.append(f"missing priority list for {o}")
            priorities.append(())
        else:
            priorities.append(check_list("priority", o, prio_raw[o], sid))
    moveseq = None
    if raw.get("moveseq") is not None:
        moveseq = check_list("moving sequence", "nature", raw["moveseq"], sid)

    if n <= 2:
        errors.append(f"need more than 2 students, got {n}")
    if n > sum(capacities):
        errors.append(f"n exceeds total capacity ({n} > {sum(capacities)})")
    if errors:
        raise ProblemError(errors)
    return Problem(
        prefs=tuple(prefs),
        priorities=tuple(priorities),
        capacities=tuple(capacities),
        moveseq=moveseq,
        student_names=tuple(str(s) for s in students),
        school_names=tuple(str(o) for o in schools),
    )


def load_problem(path) -> Problem:
    with open(path) as fh:
        return validate_problem(json.load(fh))


@dataclass(frozen=True)
class Matching:
    assign: tuple[int, ...]  # school index per student, SELF if unmatched
    rosters: tuple[frozenset[int], ...]

    @classmethod
    def from_assign(cls, assign: Sequence[int], m: int) -> "Matching":
        rosters: list[set[int]] = [set() for _ in range(m)]
        for i, o in enumerate(assign):
            if o != SELF:
                rosters[o].add(i)
        return cls(tuple(assign), tuple(frozenset(r) for r in rosters))

    def __getitem__(self, i: int) -> int:
        return self.assign[i]

    def is_feasible(self, problem: Problem) -> bool:
        if len(self.assign) != problem.n or len(self.rosters) != problem.m:
            return False
        for o, roster in enumerate(self.rosters):
            if len(roster) > problem.capacities[o]:
                return False
            if any(self.assign[i] != o for i in roster):
                return False
        return all(o == SELF or i in self.rosters[o] for i, o in enumerate(self.assign))

    def describe(self, problem: Problem) -> str:
        parts = []
        for i, o in enumerate(self.assign):
            target = problem.student_name(i) if o == SELF else problem.school_name(o)
            parts.append(f"{problem.student_name(i)}→{target}")
        return ", ".join(parts)


@dataclass(frozen=True, order=True)
class TruncationVector:
    """Prefix lengths revealed per list.

    ``prio`` has one entry per school, or a single entry when the problem is
    read in the shared-priority layout (one list counted once).
    """

    pref: tuple[int, ...]
    prio: tuple[int, ...]
    seq: int = 0

    @property
    def shared(self) -> bool:
        return len(self.prio) == 1

    def flat(self) -> tuple[int, ...]:
        return self.pref + self.prio + (self.seq,)

    @classmethod
    def from_flat(cls, flat: Sequence[int], n: int) -> "TruncationVector":
        flat = tuple(int(x) for x in flat)
        return cls(flat[:n], flat[n:-1], flat[-1])

    @classmethod
    def zeros(cls, n: int, n_prio: int) -> "TruncationVector":
        return cls((0,) * n, (0,) * n_prio, 0)

    @classmethod
    def full(cls, problem: Problem, shared: bool = False) -> "TruncationVector":
        n_prio = 1 if shared else problem.m
        seq = problem.n if problem.moveseq is not None else 0
        return cls((problem.m,) * problem.n, (problem.n,) * n_prio, seq)


def refines(a: TruncationVector, b: TruncationVector) -> bool:
    """True iff ``a`` reveals weakly more than ``b`` on every list."""
    fa, fb = a.flat(), b.flat()
    if len(a.pref) != len(b.pref) or len(fa) != len(fb):
        raise ValueError("truncation vectors have different dimensions")
    return all(x >= y for x, y in zip(fa, fb))


@dataclass(frozen=True)
class PartialProblem:
    base: Problem
    trunc: TruncationVector

    def __post_init__(self):
        t, p = self.trunc, self.base
        if len(t.pref) != p.n or len(t.prio) not in (1, p.m):
            raise ValueError("truncation vector does not fit the problem")
        if t.shared and p.m > 1 and not p.common_priority:
            raise ValueError("shared-priority truncation needs a common-priority problem")
        if any(not 0 <= x <= p.m for x in t.pref) or any(not 0 <= x <= p.n for x in t.prio):
            raise ValueError("truncation length out of range")
        if not 0 <= t.seq <= (p.n if p.moveseq is not None else 0):
            raise ValueError("moving-sequence truncation out of range")

    def _key(self):
        p, t = self.base, self.trunc
        prefs = tuple(p.prefs[i][: t.pref[i]] for i in range(p.n))
        if t.shared:
            prio = (p.priorities[0][: t.prio[0]],)
        else:
            prio = tuple(p.priorities[o][: t.prio[o]] for o in range(p.m))
        seq = p.moveseq[: t.seq] if p.moveseq is not None else None
        return (p.n, p.m, p.capacities, prefs, prio, seq)

    def __eq__(self, other):
        if not isinstance(other, PartialProblem):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def lists(self) -> list[tuple[int, ...]]:
        """Revealed prefixes in slot order: prefs, priorities, moving sequence."""
        p, t = self.base, self.trunc
        out = [p.prefs[i][: t.pref[i]] for i in range(p.n)]
        if t.shared:
            out.append(p.priorities[0][: t.prio[0]])
        else:
            out.extend(p.priorities[o][: t.prio[o]] for o in range(p.m))
        if p.moveseq is not None:
            out.append(p.moveseq[: t.seq])
        return out

    def describe(self) -> str:
        p, t = self.base, self.trunc
        parts = []
        for i in range(p.n):
            if t.pref[i]:
                shown = [p.school_name(o) for o in p.prefs[i][: t.pref[i]]]
                parts.append(f"R_{p.student_name(i)}: {_fmt(shown, p.m)}")
        prio_names = ["*"] if t.shared else [p.school_name(o) for o in range(p.m)]
        for k, length in enumerate(t.prio):
            if length:
                shown = [p.student_name(i) for i in p.priorities[k][:length]]
                parts.append(f"≻_{prio_names[k]}: {_fmt(shown, p.n)}")
        if t.seq and p.moveseq is not None:
            parts.append(f"π: {_fmt([p.student_name(i) for i in p.moveseq[: t.seq]], p.n)}")
        return "; ".join(parts) if parts else "(nothing revealed)"


def _fmt(shown: list[str], size: int) -> str:
    return ", ".join(shown + ["?"] * (1 if len(shown) < size else 0))


def informativeness(partial: PartialProblem, mode: CountingMode, focal: int | None = None) -> int:
    t = partial.trunc
    total = sum(t.prio) + t.seq + sum(t.pref)
    if mode is CountingMode.EXCLUDE_OWN and focal is not None:
        total -= t.pref[focal]
    return total


def _suffixes(prefix: tuple[int, ...], size: int) -> list[tuple[int, ...]]:
    rest = [x for x in range(size) if x not in prefix]
    return [prefix + tail for tail in itertools.permutations(rest)]


def completions(partial: PartialProblem) -> Iterator[Problem]:
    """Every full problem sharing the partial problem's prefixes, in lexicographic order."""
    p, t = partial.base, partial.trunc
    pref_opts = [_suffixes(p.prefs[i][: t.pref[i]], p.m) for i in range(p.n)]
    if t.shared:
        prio_opts = [[(c,) * p.m for c in _suffixes(p.priorities[0][: t.prio[0]], p.n)]]
    else:
        prio_opts = [_suffixes(p.priorities[o][: t.prio[o]], p.n) for o in range(p.m)]
    seq_opts = [None] if p.moveseq is None else _suffixes(p.moveseq[: t.seq], p.n)
    for prefs in itertools.product(*pref_opts):
        for prio_parts in itertools.product(*prio_opts):
            priorities = prio_parts[0] if t.shared else prio_parts
            for seq in seq_opts:
                yield p.replace(prefs=prefs, priorities=priorities, moveseq=seq)


def count_completions(partial: PartialProblem) -> int:
    p, t = partial.base, partial.trunc
    total = 1
    for length in t.pref:
        total *= math.factorial(p.m - length)
    for length in t.prio:
        total *= math.factorial(p.n - length)
    if p.moveseq is not None:
        total *= math.factorial(p.n - t.seq)
    return total


# ---------------------------------------------------------------------------
# canonical encoding

_MAGIC = b"ISP1"


def canonical_key(problem: Problem) -> bytes:
    """Injective byte encoding of a problem's structure (names excluded)."""
    n, m = problem.n, problem.m
    flat = [n, m, 1 if problem.moveseq is not None else 0]
    flat += problem.capacities
    for row in problem.prefs:
        flat += row
    for row in problem.priorities:
        flat += row
    if problem.moveseq is not None:
        flat += problem.moveseq
    return _MAGIC + struct.pack(f">{len(flat)}H", *flat)


def decode_key(key: bytes) -> Problem:
    if key[:4] != _MAGIC:
        raise ValueError("not a problem key")
    body = key[4:]
    vals = struct.unpack(f">{len(body) // 2}H", body)
    n, m, has_seq = vals[0], vals[1], vals[2]
    pos = 3
    caps = vals[pos : pos + m]
    pos += m
    prefs = [vals[pos + i * m : pos + (i + 1) * m] for i in range(n)]
    pos += n * m
    prios = [vals[pos + k * n : pos + (k + 1) * n] for k in range(m)]
    pos += n * m
    seq = vals[pos : pos + n] if has_seq else None
    return make_problem(prefs, prios, caps, seq)


# ---------------------------------------------------------------------------
# supports and enumeration


@dataclass(frozen=True)
class SupportSpec:
    """Which problems a sweep ranges over.

    ``kind`` is one of ``full``, ``top``, ``common``, ``top+common``, ``custom``.
    ``top`` kinds need the focal pair; ``custom`` needs a predicate.
    """

    kind: str = "full"
    student: int | None = None
    school: int | None = None
    predicate: Callable[[Problem], bool] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("full", "top", "common", "top+common", "custom"):
            raise ValueError(f"unknown support kind {self.kind!r}")
        if self.kind.startswith("top") and (self.student is None or self.school is None):
            raise ValueError("top-ranked support needs a focal pair")
        if self.kind == "custom" and self.predicate is None:
            raise ValueError("custom support needs a predicate")

    @property
    def common(self) -> bool:
        return self.kind in ("common", "top+common")

    @property
    def top(self) -> bool:
        return self.kind in ("top", "top+common")

    def admits(self, problem: Problem) -> bool:
        if self.top and problem.prefs[self.student][0] != self.school:
            return False
        if self.common and not problem.common_priority:
            return False
        if self.kind == "custom":
            return bool(self.predicate(problem))
        return True


def enumerate_problems(
    n: int,
    m: int,
    q: Sequence[int] | None = None,
    support: SupportSpec = SupportSpec(),
    *,
    families: Sequence[str] = ("pref", "prio"),
    reduce: bool = False,
) -> Iterator:
    """Every problem in the support, in a fixed order.

    ``families`` lists which list families vary; the others are held at the
    identity order (``"seq"`` adds a moving sequence). Under a common support
    the priority family varies as one shared list.

    With ``reduce=True`` yields ``(problem, multiplicity)`` pairs, one
    canonical representative per orbit under relabelings of students and
    schools that fix the focal pair (when the support names one).
    """
    q = tuple(q) if q is not None else (1,) * m
    if n > sum(q):
        raise ValueError("n exceeds total capacity")
    school_perms = list(itertools.permutations(range(m)))
    student_perms = list(itertools.permutations(range(n)))
    ident_prio = tuple(range(n))

    if support.top:
        per_student = [
            [p for p in school_perms if p[0] == support.school] if i == support.student else school_perms
            for i in range(n)
        ]
    else:
        per_student = [school_perms] * n
    if "pref" not in families:
        per_student = [[p[0]] for p in per_student]

    if "prio" not in families:
        prio_iter = lambda: iter([(ident_prio,) * m])  # noqa: E731
    elif support.common:
        prio_iter = lambda: ((c,) * m for c in student_perms)  # noqa: E731
    else:
        prio_iter = lambda: itertools.product(student_perms, repeat=m)  # noqa: E731
    seq_opts = student_perms if "seq" in families else [None]

    group = _relabelings(n, m, q, support) if reduce else None
    for prefs in itertools.product(*per_student):
        for prios in prio_iter():
            for seq in seq_opts:
                problem = Problem(prefs, prios, q, seq)
                if not support.admits(problem):
                    continue
                if group is None:
                    yield problem
                    continue
                key = canonical_key(problem)
                images = {canonical_key(_hold(relabel(problem, s, t), families)) for s, t in group}
                if key == min(images):
                    yield problem, len(images)


def _hold(problem: Problem, families: Sequence[str]) -> Problem:
    """Reset families that do not vary back to the identity order they are held at."""
    if "prio" not in families:
        problem = problem.replace(priorities=(tuple(range(problem.n)),) * problem.m)
    if "pref" not in families:
        problem = problem.replace(prefs=(tuple(range(problem.m)),) * problem.n)
    return problem


def _relabelings(n: int, m: int, q: Sequence[int], support: SupportSpec):
    fixed_i = support.student
    fixed_o = support.school
    out = []
    for s in itertools.permutations(range(n)):
        if fixed_i is not None and s[fixed_i] != fixed_i:
            continue
        for t in itertools.permutations(range(m)):
            if fixed_o is not None and t[fixed_o] != fixed_o:
                continue
            if any(q[t[k]] != q[k] for k in range(m)):
                continue
            out.append((s, t))
    return out


def relabel(problem: Problem, students: Sequence[int], schools: Sequence[int]) -> Problem:
    """Rename student ``j`` to ``students[j]`` and school ``k`` to ``schools[k]``."""
    n, m = problem.n, problem.m
    prefs: list = [None] * n
    for j in range(n):
        prefs[students[j]] = tuple(schools[k] for k in problem.prefs[j])
    prios: list = [None] * m
    caps: list = [0] * m
    for k in range(m):
        prios[schools[k]] = tuple(students[j] for j in problem.priorities[k])
        caps[schools[k]] = problem.capacities[k]
    seq = tuple(students[j] for j in problem.moveseq) if problem.moveseq is not None else None
    return Problem(tuple(prefs), tuple(prios), tuple(caps), seq)


def canonical_form(problem: Problem, support: SupportSpec = SupportSpec()) -> Problem:
    group = _relabelings(problem.n, problem.m, problem.capacities, support)
    return min((relabel(problem, s, t) for s, t in group), key=canonical_key)


# ---------------------------------------------------------------------------
# cloning


def clone_expand(problem: Problem) -> Problem:
    """Unit-capacity expansion: school ``o`` with ``q_o`` seats becomes ``q_o`` clones."""
    clones: list[list[int]] = []
    origin: list[int] = []
    for o, q in enumerate(problem.capacities):
        clones.append(list(range(len(origin), len(origin) + q)))
        origin.extend([o] * q)
    prefs = tuple(tuple(c for o in row for c in clones[o]) for row in problem.prefs)
    prios = tuple(problem.priorities[o] for o in origin)
    names = []
    for c, o in enumerate(origin):
        base = problem.school_name(o)
        names.append(base if problem.capacities[o] == 1 else f"{base}^{clones[o].index(c) + 1}")
    return Problem(
        prefs=prefs,
        priorities=prios,
        capacities=(1,) * len(origin),
        moveseq=problem.moveseq,
        student_names=problem.student_names,
        school_names=tuple(names),
        clone_origin=tuple(origin),
    )


def collapse_matching(clone: Problem, matching: Matching, original: Problem) -> Matching:
    """Map a matching of a clone problem back onto the original schools."""
    if clone.clone_origin is None:
        raise ValueError("problem was not produced by clone_expand")
    assign = tuple(SELF if o == SELF else clone.clone_origin[o] for o in matching.assign)
    return Matching.from_assign(assign, original.m)
