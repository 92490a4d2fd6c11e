"""Information needed to verify single-item auction outcomes on a discrete grid.

Two bidders bid integers in 0..V. The winner's own bid is known; a message
about the loser's bid is a set of grid points containing the true bid. A
message is sufficient when every bid it allows reproduces the outcome (winner
and payment). Disclosure counts the grid points a message excludes, so the
least sufficient disclosure is the information the outcome requires.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Rule(enum.Enum):
    FPA = "fpa"
    SPA = "spa"
    ASCENDING = "ascending"
    DESCENDING = "descending"


@dataclass(frozen=True)
class AuctionOutcome:
    winner: int  # 0-based bidder index
    payment: int


def _check(bids, V: int | None = None) -> tuple[int, int]:
    if len(bids) != 2:
        raise ValueError("exactly two bidders")
    for b in bids:
        if b < 0 or (V is not None and b > V):
            raise ValueError(f"bid {b} outside the grid 0..{V}")
    return int(bids[0]), int(bids[1])


def auction_outcome(rule: Rule, bids) -> AuctionOutcome:
    """Higher bid wins, bidder 1 on ties. First-price and descending charge the winning bid."""
    b0, b1 = _check(bids)
    winner = 0 if b0 >= b1 else 1
    high, low = (b0, b1) if winner == 0 else (b1, b0)
    if rule in (Rule.FPA, Rule.DESCENDING):
        return AuctionOutcome(winner, high)
    # a clock that stops when the rival drops out charges the rival's exit price
    return AuctionOutcome(winner, low)


def _good_points(rule: Rule, bids, V: int) -> list[bool]:
    """For each possible loser bid, whether the outcome is unchanged."""
    b0, b1 = _check(bids, V)
    truth = auction_outcome(rule, (b0, b1))
    loser = 1 - truth.winner
    good = []
    for x in range(V + 1):
        trial = [b0, b1]
        trial[loser] = x
        good.append(auction_outcome(rule, trial) == truth)
    return good


def verify_info(rule: Rule, bids, V: int, *, messages: str = "interval") -> int:
    """Least number of grid points a sufficient message about the loser's bid must exclude.

    ``messages="interval"`` restricts messages to ranges of the grid; ``"subset"``
    allows any set containing the truth and is meant for diagnostics.
    """
    b0, b1 = _check(bids, V)
    truth = auction_outcome(rule, (b0, b1))
    t = (b0, b1)[1 - truth.winner]
    good = _good_points(rule, (b0, b1), V)
    if messages == "subset":
        return (V + 1) - sum(good)
    if messages != "interval":
        raise ValueError(f"unknown message family {messages!r}")
    # widest sufficient interval first; the frontier shrinks one point at a time
    for width in range(V + 1, 0, -1):
        for lo in range(max(0, t - width + 1), min(t, V - width + 1) + 1):
            if all(good[lo : lo + width]):
                return (V + 1) - width
    raise AssertionError("the singleton message is always sufficient")


def verify_info_brute(rule: Rule, bids, V: int) -> int:
    """Scan every interval containing the truth; the reference for ``verify_info``."""
    b0, b1 = _check(bids, V)
    truth = auction_outcome(rule, (b0, b1))
    loser = 1 - truth.winner
    t = (b0, b1)[loser]
    best = None
    for lo in range(0, t + 1):
        for hi in range(t, V + 1):
            ok = True
            for x in range(lo, hi + 1):
                trial = [b0, b1]
                trial[loser] = x
                if auction_outcome(rule, trial) != truth:
                    ok = False
                    break
            if ok:
                cost = (V + 1) - (hi - lo + 1)
                best = cost if best is None else min(best, cost)
    return best


@dataclass
class RankingRow:
    bids: tuple[int, int]
    fpa: int
    spa: int
    ascending: int
    descending: int


@dataclass
class AuctionRanking:
    V: int
    rows: list[RankingRow]

    @property
    def spa_ge_fpa(self) -> bool:
        return all(r.spa >= r.fpa for r in self.rows)

    @property
    def ascending_ge_descending(self) -> bool:
        return all(r.ascending >= r.descending for r in self.rows)

    @property
    def static_dynamic_equivalent(self) -> bool:
        return outcome_equivalence(self.V)


def auction_ranking(V: int) -> AuctionRanking:
    if V < 1:
        raise ValueError("the ranking needs a grid with at least two points")
    rows = []
    for b0 in range(V + 1):
        for b1 in range(V + 1):
            bids = (b0, b1)
            rows.append(
                RankingRow(
                    bids,
                    verify_info(Rule.FPA, bids, V),
                    verify_info(Rule.SPA, bids, V),
                    verify_info(Rule.ASCENDING, bids, V),
                    verify_info(Rule.DESCENDING, bids, V),
                )
            )
    return AuctionRanking(V, rows)


def outcome_equivalence(V: int) -> bool:
    """Ascending matches second-price and descending matches first-price on every profile."""
    for b0 in range(V + 1):
        for b1 in range(V + 1):
            bids = (b0, b1)
            if auction_outcome(Rule.ASCENDING, bids) != auction_outcome(Rule.SPA, bids):
                return False
            if auction_outcome(Rule.DESCENDING, bids) != auction_outcome(Rule.FPA, bids):
                return False
    return True
