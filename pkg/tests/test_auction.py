import itertools

import pytest

from infosize.auction import (
    AuctionOutcome,
    Rule,
    auction_outcome,
    auction_ranking,
    outcome_equivalence,
    verify_info,
    verify_info_brute,
)


def test_outcomes():
    assert auction_outcome(Rule.FPA, (5, 3)) == AuctionOutcome(0, 5)
    assert auction_outcome(Rule.SPA, (5, 3)) == AuctionOutcome(0, 3)
    assert auction_outcome(Rule.ASCENDING, (4, 4)) == AuctionOutcome(0, 4)
    assert auction_outcome(Rule.DESCENDING, (2, 7)) == AuctionOutcome(1, 7)


def test_verify_examples():
    assert verify_info(Rule.FPA, (5, 3), 10) == 5
    assert verify_info(Rule.SPA, (5, 3), 10) == 10
    for rule in Rule:
        assert verify_info(rule, (0, 0), 0) == 0


def test_ties():
    for b in range(11):
        assert verify_info(Rule.FPA, (b, b), 10) == 10 - b
        assert verify_info(Rule.SPA, (b, b), 10) == 10


def test_small_grid_ranking():
    r = auction_ranking(1)
    assert len(r.rows) == 4
    assert r.spa_ge_fpa and r.ascending_ge_descending
    with pytest.raises(ValueError):
        auction_ranking(0)


@pytest.mark.parametrize("V", [0, 1, 3, 7, 12, 20])
def test_frontier_search_matches_brute_force(V):
    for bids in itertools.product(range(V + 1), repeat=2):
        for rule in Rule:
            assert verify_info(rule, bids, V) == verify_info_brute(rule, bids, V)


def test_subset_messages_never_need_more():
    for bids in itertools.product(range(8), repeat=2):
        for rule in Rule:
            assert verify_info(rule, bids, 7, messages="subset") <= verify_info(rule, bids, 7)


def test_disclosure_monotonicity():
    # shrinking a sufficient interval keeps it sufficient
    V = 9
    for bids in itertools.product(range(V + 1), repeat=2):
        for rule in Rule:
            truth = auction_outcome(rule, bids)
            loser = 1 - truth.winner
            t = bids[loser]

            def ok(lo, hi):
                return all(
                    auction_outcome(rule, tuple(x if k == loser else bids[k] for k in range(2))) == truth
                    for x in range(lo, hi + 1)
                )

            for lo in range(t + 1):
                for hi in range(t, V + 1):
                    if ok(lo, hi):
                        assert all(ok(a, b) for a in range(lo, t + 1) for b in range(t, hi + 1))


def test_outcome_equivalence():
    assert outcome_equivalence(10)


def test_bad_input():
    with pytest.raises(ValueError):
        verify_info(Rule.FPA, (11, 3), 10)
    with pytest.raises(ValueError):
        auction_outcome(Rule.FPA, (1, 2, 3))
    with pytest.raises(ValueError):
        verify_info(Rule.FPA, (1, 2), 5, messages="cloud")
