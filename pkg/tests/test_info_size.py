import pytest

from infosize import info_size as isz
from infosize.info_size import (
    Context,
    EmptySupport,
    Relation,
    Unsupported,
    compare,
    formula_value,
    informational_size,
    relation_of,
    worst_case_construction,
)
from infosize.market import PartialProblem, SupportSpec
from infosize.mechanisms import DA, IA, IA_TRIANGLE, SD, SD_COMMON, TTC, cap_length, run
from infosize.secure import PairTarget, secures_brute

TOP_TABLE = {
    "IA": [4, 6, 8, 10, 12, 14, 16, 18],
    "SD": [5, 9, 14, 20, 27, 35, 44, 54],
    "TTC": [8, 15, 24, 35, 48, 63, 80, 99],
    "DA": [6, 15, 28, 45, 66, 91, 120, 153],
}


def test_top_formula_table():
    assert isz.top_formula_table(range(3, 11)) == TOP_TABLE


def test_formula_examples():
    assert formula_value(TTC, 5).value == 24
    assert formula_value(DA, 5).value == 28
    assert formula_value(DA, 5).kind == "lower bound"
    assert formula_value(DA, 3).kind == "closed form"
    assert formula_value(IA, 3, Context("common", 3)).value == 5


@pytest.mark.parametrize("n", range(3, 11))
def test_common_ia_formula(n):
    assert formula_value(IA, n, Context("common", 1)).value == 2 * (n - 1)
    assert formula_value(IA, n, Context("common", 2)).value == 2 * (n - 1) + (n - 2)
    assert formula_value(IA, n, Context("common", n)).value == n * (n - 1) // 2 + (n - 1)
    for mech in (TTC, DA, SD_COMMON):
        assert formula_value(mech, n, Context("common", 2)).value == TOP_TABLE["SD"][n - 3]


@pytest.mark.parametrize("n", range(3, 11))
def test_heterogeneous_recursions(n):
    ia = formula_value(IA, n, Context("hetero", 2))
    assert (ia.value, ia.alt) == (4 * n - 6, 4 * n - 5)
    ttc = formula_value(TTC, n, Context("hetero", 2))
    assert ttc.value == (n + 1) * (n - 1) + (n - 2)


def test_unsupported_formulas():
    with pytest.raises(Unsupported):
        formula_value(SD, 4, Context("hetero", 2))
    with pytest.raises(ValueError):
        formula_value(IA, 2)
    with pytest.raises(ValueError):
        formula_value(IA, 3, Context("common", 4))


def test_relation_of():
    assert relation_of([(0, 0, 1, 1)]) is Relation.EQUAL
    assert relation_of([(0, 0, 1, 1), (0, 1, 2, 3)]) is Relation.LESS
    assert relation_of([(0, 0, 2, 1)]) is Relation.GREATER
    assert relation_of([(0, 0, 2, 1), (0, 1, 1, 2)]) is Relation.INCOMPARABLE


def test_compare_reflexive():
    v = compare(TTC, TTC, "top")
    assert v.relation is Relation.EQUAL
    assert "≐" in v.describe()


def test_compare_wording_states_numeric_order_first():
    v = isz.CompareVerdict(IA, DA, Relation.LESS, [(0, 0, 1, 2)])
    text = v.describe()
    assert text.startswith("IS(IA) <̇ IS(DA)")
    assert "DA is less informative than IA" in text


def test_sd_gated_on_full_support():
    with pytest.raises(Unsupported):
        compare(IA, SD, "full")
    with pytest.raises(Unsupported):
        informational_size(SD_COMMON, PairTarget(0, 0), SupportSpec("full"))


def test_empty_support():
    # with every list capped at one entry the last choice is never assigned
    with pytest.raises(EmptySupport):
        informational_size(
            cap_length(DA, 1, 3), PairTarget(0, 0), SupportSpec("custom", predicate=lambda p: p.prefs[0][0] != 0)
        )


def test_report_fields_are_consistent():
    rep = informational_size(DA, PairTarget(0, 0), SupportSpec("full"))
    assert run(DA, rep.argmax_problem)[0] == 0
    part = PartialProblem(rep.argmax_problem, rep.witness)
    assert secures_brute(DA, part, PairTarget(0, 0))
    assert rep.value == max(rep.per_rank.values())
    assert rep.provenance == isz.EXHAUSTIVE


@pytest.mark.parametrize(
    "mech, spec, target",
    [
        (IA, SupportSpec("top", 0, 0), PairTarget(0, 0)),
        (SD, SupportSpec("top", 1, 2), PairTarget(1, 2)),
        (TTC, SupportSpec("top", 0, 0), PairTarget(0, 0)),
        (DA, SupportSpec("common"), PairTarget(2, 1)),
        (SD_COMMON, SupportSpec("common"), PairTarget(0, 0)),
    ],
)
def test_reduced_search_equals_sweep(mech, spec, target):
    a = informational_size(mech, target, spec, engine="search")
    b = informational_size(mech, target, spec)
    assert (a.value, a.problems, a.per_rank) == (b.value, b.problems, b.per_rank)
    assert a.argmax_problem == b.argmax_problem


def test_search_refuses_large_n():
    with pytest.raises(Unsupported):
        informational_size(IA, PairTarget(0, 0), SupportSpec("top", 0, 0), n=4, engine="search")


def test_ia_triangle_sizes_cover_every_pair():
    sizes = isz.ia_triangle_is(3)
    assert set(sizes) == {(i, o) for i in range(3) for o in range(3)}
    assert all(v >= 1 for v in sizes.values())


@pytest.mark.parametrize(
    "mech, n, value",
    [(DA, 4, 15), (TTC, 4, 15), (IA, 3, 4), (SD, 4, 9), (DA, 3, 7), (TTC, 3, 8)],
)
def test_construction_values_and_sufficiency(mech, n, value):
    c = worst_case_construction(mech, n)
    assert c.informativeness == value
    chk = isz.check_construction(c)
    assert chk.value == value
    assert chk.secures
    assert run(mech, c.problem)[c.target.student] == c.target.school


def test_common_ia_construction_rank3():
    c = isz.common_ia_construction(3, 3)
    chk = isz.check_construction(c)
    assert chk.value == 5 and chk.passed


def test_undefined_constructions():
    with pytest.raises(Unsupported):
        worst_case_construction(DA, 4, 2)
    with pytest.raises(Unsupported):
        worst_case_construction(DA, 5)


def test_sampling_is_independent_of_worker_count(monkeypatch):
    monkeypatch.setattr(isz, "SAMPLE_CHUNK", 15)
    one = isz.sample_top_ranked(SD, 4, 45, 9, seed=3, jobs=1)
    two = isz.sample_top_ranked(SD, 4, 45, 9, seed=3, jobs=2)
    assert one.samples == two.samples == 45
    assert (one.max_nu, one.argmax_problem, one.exceed) == (two.max_nu, two.argmax_problem, two.exceed)
    assert one.argmax_problem.prefs[3][0] == 3


def test_verify_claims_scale_guard():
    with pytest.raises(Unsupported):
        isz.verify_claims(5)


def test_ia_triangle_not_reduced():
    rep = informational_size(IA_TRIANGLE, PairTarget(0, 1), SupportSpec("full"), engine="search")
    assert rep.value == informational_size(IA_TRIANGLE, PairTarget(0, 1), SupportSpec("full")).value
