import itertools
import random

import pytest

from infosize.market import SELF, make_problem, relabel
from infosize.mechanisms import (
    DA,
    IA,
    IA_TRIANGLE,
    SD,
    SD_COMMON,
    TTC,
    MechanismError,
    MechanismId,
    blocking_pairs,
    cap_length,
    check_fhr,
    check_pareto_efficient,
    check_stable,
    induced_common_order,
    pareto_efficient_brute,
    run,
    run_da,
    run_ia,
    run_ia_triangle,
    run_sd,
    run_ttc,
)

from conftest import EX2_DA, EX2_TTC, PERMS3

# DA is inefficient here: students 1 and 2 would swap a and b
INEFFICIENT = make_problem(((1, 0, 2), (0, 1, 2), (0, 1, 2)), ((0, 2, 1), (1, 0, 2), (0, 1, 2)))


def _random_problem(rng, n, m=None, seq=True):
    m = m or n
    return make_problem(
        [rng.sample(range(m), m) for _ in range(n)],
        [rng.sample(range(n), n) for _ in range(m)],
        moveseq=rng.sample(range(n), n) if seq else None,
    )


def test_example2_outcomes():
    assert run_ia(EX2_TTC).assign == (0, 2, 1)
    assert run_ttc(EX2_TTC).assign == (0, 2, 1)
    assert run_da(EX2_DA).assign == (0, 2, 1)


def test_distinct_tops_give_tops():
    p = make_problem(((2, 0, 1), (0, 1, 2), (1, 2, 0)), ((2, 1, 0), (0, 2, 1), (1, 0, 2)), moveseq=(1, 2, 0))
    for mech in (IA, DA, TTC, SD, IA_TRIANGLE):
        assert run(mech, p).assign == (2, 0, 1)


def test_ia_settles_unique_top_in_first_round():
    # four students, only student 4 names school 4 first
    p = make_problem(((0, 1, 2, 3), (0, 2, 1, 3), (1, 0, 2, 3), (3, 0, 1, 2)), [(0, 1, 2, 3)] * 4)
    trace = []
    x = run(IA, p, trace)
    assert x[3] == 3
    assert "IA step 1: school d receives {4}, admits 4 permanently" in trace


def test_sd_sequential_greedy():
    p = make_problem(((0, 1, 2), (0, 1, 2), (0, 1, 2)), moveseq=(0, 1, 2))
    assert run_sd(p).assign == (0, 1, 2)


def test_last_dictator_gets_leftover():
    # the last mover's school is ranked last by every earlier dictator
    p = make_problem(((0, 1, 2, 3), (1, 0, 2, 3), (2, 1, 0, 3), (3, 2, 1, 0)), moveseq=(0, 1, 2, 3))
    assert run_sd(p)[3] == 3


def test_sd_requires_moving_sequence():
    with pytest.raises(MechanismError):
        run_sd(EX2_TTC)


def test_sd_common_requires_common_priority():
    with pytest.raises(MechanismError):
        run_sd(EX2_TTC, common=True)


def test_sd_common_follows_shared_list():
    p = make_problem(((0, 1, 2),) * 3, common=(2, 0, 1))
    assert run_sd(p, common=True).assign == (1, 2, 0)


def test_induced_common_order():
    assert induced_common_order((1, 0, 2, 3), 4) == (1, 0, 2, 3)
    assert induced_common_order((0, 1, 2, 3, 4), 5) == (0, 1, 2, 3, 4)
    assert induced_common_order((1, 0, 2), 3) == (1, 0, 2)
    # the last school never stands in for a student
    assert induced_common_order((2, 1, 0), 3) == (1, 0, 2)


def test_ia_triangle_uses_last_students_list():
    p = make_problem(((0, 1, 2), (0, 2, 1), (1, 0, 2)), common=(0, 1, 2))
    x = run_ia_triangle(p)
    assert x[1] == 0
    # the last student never displaces anyone in round one
    q = make_problem(((0, 1, 2), (1, 0, 2), (0, 1, 2)), common=(2, 1, 0))
    assert run_ia_triangle(q)[0] == 0


def test_cap_length_examples():
    p = make_problem(((0, 1, 2),) * 3, common=(0, 1, 2))
    assert run(cap_length(DA, 1, 3), p).assign == (0, SELF, SELF)
    distinct = make_problem(((0, 1, 2), (1, 2, 0), (2, 0, 1)))
    assert run(cap_length(IA, 1, 3), distinct).assign == run(IA, distinct).assign
    with pytest.raises(MechanismError):
        cap_length(DA, 3, 3)
    with pytest.raises(MechanismError):
        cap_length(DA, 0, 3)


def test_cap_without_binding_matches_uncapped():
    rng = random.Random(11)
    capped = cap_length(TTC, 2, 3)
    for _ in range(300):
        p = _random_problem(rng, 3, seq=False)
        x = run(TTC, p)
        if all(p.rank(x[i], i) <= 2 for i in range(3)):
            assert run(capped, p).assign == x.assign


def test_pareto_checker_examples():
    x = run_da(INEFFICIENT)
    assert x.assign == (0, 1, 2)
    assert not check_pareto_efficient(INEFFICIENT, x)
    assert not check_fhr(INEFFICIENT, x)
    tops = make_problem(((0, 1, 2), (1, 0, 2), (2, 0, 1)))
    assert check_pareto_efficient(tops, run_da(tops))
    assert check_fhr(tops, run_da(tops))
    assert check_stable(tops, run_da(tops))


def test_ttc_blocking_pair():
    t = run_ttc(INEFFICIENT)
    assert not check_stable(INEFFICIENT, t)
    assert (2, 0) in blocking_pairs(INEFFICIENT, t)


def test_pareto_checker_matches_brute_force():
    rng = random.Random(2)
    for _ in range(400):
        p = _random_problem(rng, 3, seq=False)
        x = run(DA, p)
        assert check_pareto_efficient(p, x) == pareto_efficient_brute(p, x)


def test_traces_name_the_steps():
    for mech, problem in ((IA, EX2_TTC), (DA, EX2_DA), (TTC, EX2_TTC)):
        trace = []
        run(mech, problem, trace)
        assert trace and all(line.startswith(f"{mech} step") for line in trace)


def test_common_priority_coincidence_exhaustive():
    for prefs in itertools.product(PERMS3, repeat=3):
        for c in PERMS3:
            p = make_problem(prefs, common=c)
            x = run_da(p).assign
            assert run_ttc(p).assign == x
            assert run_sd(p, common=True).assign == x


@pytest.mark.parametrize("n", [3, 4])
def test_permutation_equivariance(n):
    rng = random.Random(n)
    for _ in range(150):
        p = _random_problem(rng, n)
        s = rng.sample(range(n), n)
        t = rng.sample(range(n), n)
        q = relabel(p, s, t)
        for mech in (IA, DA, TTC, SD):
            x, y = run(mech, p).assign, run(mech, q).assign
            assert all(y[s[i]] == t[x[i]] for i in range(n))


def test_triangle_equivariance_under_school_relabel_of_last_student():
    # relabeling the first n-1 students together with their stand-in schools
    rng = random.Random(7)
    for _ in range(200):
        p = _random_problem(rng, 3, seq=False)
        perm = rng.sample(range(2), 2) + [2]
        q = relabel(p, perm, perm)
        x, y = run_ia_triangle(p).assign, run_ia_triangle(q).assign
        assert all(y[perm[i]] == perm[x[i]] for i in range(3))


def test_full_matching_without_cap():
    rng = random.Random(4)
    for _ in range(200):
        p = _random_problem(rng, 4)
        for mech in (IA, DA, TTC, SD, IA_TRIANGLE):
            assert SELF not in run(mech, p).assign


def test_mechanism_id_parse():
    assert MechanismId.parse("sd-common") == SD_COMMON
    assert MechanismId.parse("ia-triangle") == IA_TRIANGLE
    assert str(cap_length(DA, 2, 3)) == "DA^2"
    with pytest.raises(MechanismError):
        MechanismId.parse("boston")
