import itertools
import random

import pytest

from infosize.market import CountingMode, PartialProblem, TruncationVector, informativeness, make_problem
from infosize.mechanisms import DA, IA, SD, TTC, cap_length, run
from infosize.secure import (
    OutsideSupport,
    PairTarget,
    brute_force_nu,
    locally_necessary,
    min_secure_info,
    minimal_witnesses,
    secures,
    secures_brute,
)

from conftest import EX2_DA, EX2_TTC, PERMS3

ONE_A = PairTarget(0, 0)


def _random_problem(rng):
    return make_problem(
        [rng.choice(PERMS3) for _ in range(3)], [rng.choice(PERMS3) for _ in range(3)], moveseq=rng.choice(PERMS3)
    )


def _decrements(trunc):
    flat = trunc.flat()
    for s, v in enumerate(flat):
        if v:
            yield TruncationVector.from_flat(flat[:s] + (v - 1,) + flat[s + 1 :], len(trunc.pref))


def test_full_information_secures_own_outcome():
    for mech in (IA, DA, TTC):
        x = run(mech, EX2_TTC)
        for i in range(3):
            part = PartialProblem(EX2_TTC, TruncationVector.full(EX2_TTC))
            assert secures(mech, part, PairTarget(i, x[i]))


def test_example2_da_witness_secures():
    part = PartialProblem(EX2_DA, TruncationVector((3, 2, 1), (2, 2, 0)))
    assert secures(DA, part, ONE_A)
    assert secures_brute(DA, part, ONE_A)


def test_weakened_da_witness_fails_with_the_rerouting_completion():
    part = PartialProblem(EX2_DA, TruncationVector((3, 2, 1), (2, 1, 0)))
    assert not secures(DA, part, ONE_A)
    bad = EX2_DA.replace(prefs=((0, 1, 2), (1, 2, 0), (1, 0, 2)), priorities=((1, 2, 0), (0, 1, 2), (2, 1, 0)))
    assert run(DA, bad)[0] != 0
    assert run(DA, bad)[2] == 0


def test_ia_top_and_first_priority_needs_one_unit():
    rng = random.Random(8)
    seen = 0
    for _ in range(400):
        p = _random_problem(rng)
        i, o = rng.randrange(3), rng.randrange(3)
        if p.prefs[i][0] != o or p.priorities[o][0] != i:
            continue
        seen += 1
        res = min_secure_info(IA, p, PairTarget(i, o))
        assert res.nu == 1
        want = [0, 0, 0]
        want[o] = 1
        pref = [0, 0, 0]
        pref[i] = 3
        assert res.witness == TruncationVector(tuple(pref), tuple(want), 0)
    assert seen > 10


def test_outside_support():
    with pytest.raises(OutsideSupport, match="outside support"):
        min_secure_info(TTC, EX2_TTC, PairTarget(1, 0))


@pytest.mark.parametrize("mech, problem", [(TTC, EX2_TTC), (DA, EX2_DA), (IA, EX2_TTC)])
def test_example2_witness_is_minimal_and_locally_necessary(mech, problem):
    res = min_secure_info(mech, problem, ONE_A)
    part = PartialProblem(problem, res.witness)
    assert secures_brute(mech, part, ONE_A)
    assert informativeness(part, CountingMode.EXCLUDE_OWN, 0) == res.nu
    assert not any(still for _, still in locally_necessary(mech, problem, ONE_A, res.witness))
    assert brute_force_nu(mech, problem, ONE_A)[0] == res.nu


def test_minimal_witnesses_antichain():
    for mech, problem in ((TTC, EX2_TTC), (DA, EX2_DA)):
        res = min_secure_info(mech, problem, ONE_A)
        ws = minimal_witnesses(mech, problem, ONE_A)
        assert res.witness in ws
        for w in ws:
            assert secures_brute(mech, PartialProblem(problem, w), ONE_A)
            for lower in _decrements(w):
                if lower.pref[0] != 3:
                    continue  # own list is held fixed when it is not counted
                assert not secures_brute(mech, PartialProblem(problem, lower), ONE_A)
        for a, b in itertools.permutations(ws, 2):
            assert a.flat() != b.flat()
            assert not all(x >= y for x, y in zip(a.flat(), b.flat()))


def test_best_first_matches_brute_force_sample():
    rng = random.Random(21)
    for _ in range(40):
        p = _random_problem(rng)
        mech = rng.choice((IA, DA, TTC, SD))
        i = rng.randrange(3)
        t = PairTarget(i, run(mech, p)[i])
        assert min_secure_info(mech, p, t).nu == brute_force_nu(mech, p, t)[0]


def test_counting_mode_shift_bounded_by_rank():
    rng = random.Random(9)
    for _ in range(150):
        p = _random_problem(rng)
        mech = rng.choice((IA, DA, TTC, SD))
        i = rng.randrange(3)
        o = run(mech, p)[i]
        t = PairTarget(i, o)
        shift = min_secure_info(mech, p, t, CountingMode.INCLUDE_OWN).nu - min_secure_info(mech, p, t).nu
        assert 0 <= shift <= p.rank(o, i)


def test_capped_mechanism_secures_against_brute():
    rng = random.Random(13)
    capped = cap_length(DA, 2, 3)
    checked = 0
    for _ in range(60):
        p = _random_problem(rng)
        i = rng.randrange(3)
        o = run(capped, p)[i]
        if o < 0:
            continue
        checked += 1
        t = PairTarget(i, o)
        assert min_secure_info(capped, p, t).nu == brute_force_nu(capped, p, t)[0]
    assert checked > 20
