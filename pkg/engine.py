"""
Count Engine Module for the STV Audit Engine

Runs the STV count loop under a Ruleset and records every count in a
CountTranscript:

  1. distribute first preferences
  2. compute the quota
  3. elect candidates holding a quota
  4. stop when every vacancy is filled
  5. elect the remaining continuing candidates when they exactly fill the
     remaining vacancies
  6. distribute the largest undistributed surplus, back to 3
  7. exclude the lowest continuing candidate batch by batch
  8. back to 3
"""

import logging
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

from error_handler import UnresolvedTieError
from model import (Ballot, CandidateState, CandidateStatus, Election, PaperBundle,
                   Parcel)
from rational import Rational, format_rational, round_down
from rules import (Quota, Ruleset, SurplusMethod, compute_quota, surplus_fraction_nsw,
                   transfer_value_unified, transfer_value_weighted)

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


class ActionKind(Enum):
    FIRST_PREFERENCES = "first_preferences"
    SURPLUS = "surplus"
    EXCLUSION = "exclusion"


@dataclass(frozen=True)
class CountAction:
    """
    What a count did. Exclusions carry the batch they moved: batch number
    (1-based), number of batches, and the batch's transfer value.
    """
    kind: ActionKind
    candidate: Optional[int] = None
    batch: Optional[int] = None
    batches: Optional[int] = None
    batch_tv: Optional[Rational] = None


@dataclass(frozen=True)
class ParcelTransfer:
    """
    Papers from one source parcel moving to one destination at one value.
    A destination of None means the papers exhausted.
    """
    source_received_at: int
    papers: int
    incoming_tv: Rational
    outgoing_tv: Rational
    destination: Optional[int]
    value: Rational


@dataclass(frozen=True)
class CountStep:
    index: int
    action: CountAction
    removed: Rational
    credited: tuple[Rational, ...]
    transfer_value_used: Optional[Rational]
    exhausted_papers: int
    exhausted_value: Rational
    rounding_loss: Rational
    elected_now: tuple[int, ...]
    excluded_now: Optional[int]
    tallies: tuple[Rational, ...]
    transfers: tuple[ParcelTransfer, ...] = field(default_factory=tuple)
    surplus_fraction: Optional[Rational] = None
    exhausted_aggregate: Optional[Rational] = None
    exclusion_margin: Optional[Rational] = None


@dataclass(frozen=True)
class CountTranscript:
    election: Election
    ruleset: Ruleset
    quota: Quota
    steps: tuple[CountStep, ...]
    winners: tuple[int, ...]
    final_states: tuple[CandidateState, ...]

    def step(self, index: int) -> CountStep:
        return self.steps[index - 1]


class Termination(Enum):
    CONTINUE = "continue"
    ELECTED_ALL = "elected_all"
    FILL_REMAINING = "fill_remaining"


def check_termination(statuses: Sequence[CandidateStatus], vacancies: int) -> Termination:
    """ Steps 4 and 5 of the count """
    elected = sum(1 for s in statuses if s == CandidateStatus.ELECTED)
    continuing = sum(1 for s in statuses if s == CandidateStatus.CONTINUING)
    if elected >= vacancies:
        return Termination.ELECTED_ALL
    if continuing == vacancies - elected:
        return Termination.FILL_REMAINING
    return Termination.CONTINUE


def distribute_first_preferences(e: Election) -> dict[int, Parcel]:
    """ One parcel per candidate holding every paper that ranks them first, at value 1 """
    bundles: dict[int, list[PaperBundle]] = {c.index: [] for c in e.candidates}
    for ballot_index, ballot in enumerate(e.ballots):
        bundles[ballot.preferences[0]].append(PaperBundle(ballot_index, 0, ballot.multiplicity))
    parcels: dict[int, Parcel] = {}
    for candidate, held in bundles.items():
        papers = sum(b.count for b in held)
        parcels[candidate] = Parcel(tuple(held), ONE, 1, Fraction(papers))
    return parcels


@dataclass
class _Unit:
    """ Papers credited to one destination as one rounded amount """
    destination: int
    outgoing_tv: Rational
    bundles: list[PaperBundle] = field(default_factory=list)

    @property
    def papers(self) -> int:
        return sum(b.count for b in self.bundles)


class Counter:
    """
    Mutable working state of a single count. Use run_count() rather than
    driving this directly.
    """

    def __init__(self, election: Election, ruleset: Ruleset) -> None:
        self.election = election
        self.ruleset = ruleset
        self.quota = compute_quota(election.total_papers, election.vacancies)

        n = len(election.candidates)
        self.status: list[CandidateStatus] = [CandidateStatus.CONTINUING] * n
        self.tallies: list[Rational] = [ZERO] * n
        self.parcels: list[list[Parcel]] = [[] for _ in range(n)]
        self.order_elected: dict[int, int] = {}
        self.elected: list[int] = []
        self.pending_surpluses: list[int] = []
        self.history: list[tuple[Rational, ...]] = []
        self.steps: list[CountStep] = []
        self.finished = False

    # region Helpers
    @property
    def next_index(self) -> int:
        return len(self.steps) + 1

    def __is_continuing(self, candidate: int) -> bool:
        return self.status[candidate] == CandidateStatus.CONTINUING

    def __ballot(self, bundle: PaperBundle) -> Ballot:
        return self.election.ballots[bundle.ballot_index]

    def __next_continuing(self, bundle: PaperBundle) -> Optional[tuple[int, int]]:
        """ (cursor, candidate) of the next continuing preference, or None if the paper exhausts """
        prefs = self.__ballot(bundle).preferences
        for cursor in range(bundle.cursor + 1, len(prefs)):
            if self.__is_continuing(prefs[cursor]):
                return cursor, prefs[cursor]
        return None

    def __name(self, candidate: int) -> str:
        return self.election.candidates[candidate].name

    def __rounded(self, value: Rational) -> Rational:
        return round_down(value, self.ruleset.rounding)

    def __order_by_countback(self, group: list[int], descending: bool) -> list[int]:
        """
        Order candidates tied on the current tally: by tally at the most
        recent prior count where they differed, then by lowest index.
        """
        return self.__resolve_tie(sorted(group), len(self.history) - 2, descending)

    def __resolve_tie(self, group: list[int], at: int, descending: bool) -> list[int]:
        if len(group) <= 1:
            return list(group)
        while at >= 0 and len({self.history[at][c] for c in group}) == 1:
            at -= 1
        if at < 0:
            return sorted(group)
        values = sorted({self.history[at][c] for c in group}, reverse=descending)
        ordered: list[int] = []
        for value in values:
            sub = [c for c in group if self.history[at][c] == value]
            ordered.extend(self.__resolve_tie(sub, at - 1, descending))
        return ordered

    def __order_by_tally(self, candidates: list[int], descending: bool) -> list[int]:
        ordered: list[int] = []
        for value in sorted({self.tallies[c] for c in candidates}, reverse=descending):
            tied = [c for c in candidates if self.tallies[c] == value]
            ordered.extend(self.__order_by_countback(tied, descending))
        if len(ordered) != len(candidates):
            raise UnresolvedTieError("tie-break ladder lost a candidate", len(self.steps))
        return ordered
    # endregion

    def run(self) -> CountTranscript:
        """ Main execution entry to the Counter """
        self.__first_preferences()
        while not self.finished:
            if self.pending_surpluses:
                self.distribute_surplus(self.__largest_surplus())
            else:
                self.exclude_lowest()

        final_states = tuple(
            CandidateState(
                status=self.status[c],
                tally=self.tallies[c],
                parcels=tuple(self.parcels[c]),
                order_elected=self.order_elected.get(c),
            )
            for c in range(len(self.election.candidates))
        )
        return CountTranscript(
            election=self.election,
            ruleset=self.ruleset,
            quota=self.quota,
            steps=tuple(self.steps),
            winners=tuple(self.elected),
            final_states=final_states,
        )

    # region Counts
    def __first_preferences(self) -> None:
        first = distribute_first_preferences(self.election)
        credited = [ZERO] * len(self.election.candidates)
        for candidate, parcel in first.items():
            if parcel.papers > 0:
                self.parcels[candidate].append(parcel)
            credited[candidate] = parcel.credited
            self.tallies[candidate] = parcel.credited

        logger.info("Quota is %d from %d papers", self.quota.value, self.election.total_papers)
        self.__close_count(
            action=CountAction(ActionKind.FIRST_PREFERENCES),
            removed=Fraction(self.election.total_papers),
            credited=credited,
            transfer_value_used=ONE,
            exhausted_papers=0,
            exhausted_value=ZERO,
        )

    def __largest_surplus(self) -> int:
        """ Largest surplus first; ties go to the candidate elected earliest """
        return min(self.pending_surpluses,
                   key=lambda c: (-(self.tallies[c] - self.quota.value), self.order_elected[c]))

    def distribute_surplus(self, elected: int) -> list[CountStep]:
        """ Step 6: moves the surplus of `elected` onward as one count """
        self.pending_surpluses.remove(elected)
        tally = self.tallies[elected]
        surplus = tally - self.quota.value
        index = self.next_index
        method = self.ruleset.surplus_method

        # (source parcel, bundle, (cursor, destination) or None when exhausted)
        considered: list[tuple[Parcel, PaperBundle, Optional[tuple[int, int]]]] = []
        match method:
            case SurplusMethod.LAST_PARCEL:
                latest = max((p.received_at for p in self.parcels[elected]), default=0)
                source_parcels = [p for p in self.parcels[elected] if p.received_at == latest]
            case _:
                source_parcels = list(self.parcels[elected])
        for parcel in source_parcels:
            for bundle in parcel.bundles:
                considered.append((parcel, bundle, self.__next_continuing(bundle)))

        surplus_fraction: Optional[Rational] = None
        exhausted_aggregate: Optional[Rational] = None
        transfer_value_used: Optional[Rational] = None
        moving: list[tuple[Parcel, PaperBundle, tuple[int, int], Rational]] = []
        exhausted: list[tuple[Parcel, PaperBundle, Rational]] = []
        retained: list[Parcel] = [p for p in self.parcels[elected] if p not in source_parcels]

        reduce = self.ruleset.exhausted_reduce_denominator

        if method == SurplusMethod.RANDOM_SAMPLE:
            moving, exhausted, retained_bundles = self.__sample_papers(considered, surplus, elected, index)
            retained.extend(retained_bundles)
            transfer_value_used = ONE
        elif method == SurplusMethod.LAST_PARCEL:
            continuing_papers = sum(b.count for _, b, dest in considered if dest is not None)
            all_papers = sum(b.count for _, b, _ in considered)
            denominator = continuing_papers if reduce else all_papers
            tv_out = min(ONE, surplus / denominator) if denominator > 0 else ZERO
            transfer_value_used = tv_out
            for parcel, bundle, dest in considered:
                if dest is None:
                    exhausted.append((parcel, bundle, tv_out))
                else:
                    moving.append((parcel, bundle, dest, tv_out))
        elif reduce:
            exhausted_aggregate = sum((b.count * p.transfer_value for p, b, dest in considered if dest is None), ZERO)
            surplus_fraction = surplus_fraction_nsw(tally, self.quota, exhausted_aggregate,
                                                    self.ruleset.surplus_cap_at_one, index)
            for parcel, bundle, dest in considered:
                if dest is None:
                    exhausted.append((parcel, bundle, parcel.transfer_value))
                else:
                    moving.append((parcel, bundle, dest, parcel.transfer_value * surplus_fraction))
        elif method == SurplusMethod.UNIFIED_TV:
            papers = sum(b.count for _, b, _ in considered)
            tv_out = transfer_value_unified(surplus, papers)
            transfer_value_used = tv_out
            for parcel, bundle, dest in considered:
                if dest is None:
                    exhausted.append((parcel, bundle, tv_out))
                else:
                    moving.append((parcel, bundle, dest, tv_out))
        else:
            total_value = sum((p.exact_value for p in source_parcels), ZERO)
            for parcel, bundle, dest in considered:
                tv_out = transfer_value_weighted(parcel.transfer_value, surplus, total_value)
                if dest is None:
                    exhausted.append((parcel, bundle, tv_out))
                else:
                    moving.append((parcel, bundle, dest, tv_out))

        if method == SurplusMethod.LAST_PARCEL and reduce:
            # kept by the elected candidate; these papers never leave the count
            retained.extend(self.__set_aside(exhausted))
            exhausted = []
        credited, transfers, delivered = self.__deliver(moving, index, self.ruleset.batch_by_incoming_tv)
        transfers.extend(
            ParcelTransfer(parcel.received_at, bundle.count, parcel.transfer_value, tv, None, bundle.count * tv)
            for parcel, bundle, tv in exhausted
        )
        exhausted_papers = sum(bundle.count for _, bundle, _ in exhausted)

        if surplus_fraction is not None:
            exhausted_value = max(ZERO, exhausted_aggregate - self.quota.value)
        else:
            exhausted_value = surplus - delivered

        self.parcels[elected] = retained
        self.tallies[elected] = Fraction(self.quota.value)

        logger.info("Count %d: surplus of %s (%s) distributed", index, self.__name(elected), format_rational(surplus))
        return [self.__close_count(
            action=CountAction(ActionKind.SURPLUS, candidate=elected),
            removed=surplus,
            credited=credited,
            transfer_value_used=transfer_value_used,
            exhausted_papers=exhausted_papers,
            exhausted_value=exhausted_value,
            transfers=transfers,
            surplus_fraction=surplus_fraction,
            exhausted_aggregate=exhausted_aggregate,
        )]

    def __sample_papers(self, considered, surplus: Rational, elected: int, index: int):
        """ Draws floor(surplus) papers, reproducibly, to move at value 1 """
        reduce = self.ruleset.exhausted_reduce_denominator
        pool: list[int] = []
        for position, (_, bundle, dest) in enumerate(considered):
            if reduce and dest is None:
                continue
            pool.extend([position] * bundle.count)

        wanted = min(int(surplus), len(pool))
        rng = random.Random((self.ruleset.sample_seed << 32) ^ (index << 8) ^ elected)
        chosen: dict[int, int] = {}
        for slot in sorted(rng.sample(range(len(pool)), wanted)):
            chosen[pool[slot]] = chosen.get(pool[slot], 0) + 1

        moving, exhausted, retained = [], [], []
        for position, (parcel, bundle, dest) in enumerate(considered):
            taken = chosen.get(position, 0)
            if taken:
                picked = PaperBundle(bundle.ballot_index, bundle.cursor, taken)
                if dest is None:
                    exhausted.append((parcel, picked, ONE))
                else:
                    moving.append((parcel, picked, dest, ONE))
            if bundle.count - taken:
                retained.append(Parcel((PaperBundle(bundle.ballot_index, bundle.cursor, bundle.count - taken),),
                                       parcel.transfer_value, parcel.received_at, ZERO))
        return moving, exhausted, retained

    def __set_aside(self, exhausted) -> list[Parcel]:
        return [Parcel((bundle,), parcel.transfer_value, parcel.received_at, ZERO)
                for parcel, bundle, _ in exhausted]

    def __deliver(self, moving, index: int, split_by_incoming: bool):
        """
        Groups moving papers into rounding units, credits each destination
        and hands it the new parcels. Returns (credited, transfers, exact value delivered).
        """
        units: dict[tuple, _Unit] = {}
        transfers: dict[tuple, list] = {}
        for parcel, bundle, (cursor, dest), tv_out in moving:
            key = (dest, tv_out, parcel.transfer_value) if split_by_incoming else (dest, tv_out)
            unit = units.setdefault(key, _Unit(dest, tv_out))
            unit.bundles.append(PaperBundle(bundle.ballot_index, cursor, bundle.count))
            tkey = (parcel.received_at, parcel.transfer_value, tv_out, dest)
            record = transfers.setdefault(tkey, [0])
            record[0] += bundle.count

        credited = [ZERO] * len(self.election.candidates)
        delivered = ZERO
        for unit in units.values():
            exact = unit.papers * unit.outgoing_tv
            amount = self.__rounded(exact)
            delivered += exact
            credited[unit.destination] += amount
            self.tallies[unit.destination] += amount
            self.parcels[unit.destination].append(
                Parcel(tuple(unit.bundles), unit.outgoing_tv, index, amount))

        records = [
            ParcelTransfer(received_at, papers, incoming, outgoing, dest, papers * outgoing)
            for (received_at, incoming, outgoing, dest), (papers,) in transfers.items()
        ]
        return credited, records, delivered

    def exclude_lowest(self) -> list[CountStep]:
        """ Step 7: excludes the lowest continuing candidate, one count per transfer-value batch """
        continuing = [c for c in range(len(self.status)) if self.__is_continuing(c)]
        ordered = self.__order_by_tally(continuing, descending=False)
        excluded = ordered[0]
        margin = None
        if len(ordered) > 1:
            margin = self.tallies[ordered[1]] - self.tallies[excluded]
        self.status[excluded] = CandidateStatus.EXCLUDED
        logger.info("Count %d: %s excluded on %s", self.next_index, self.__name(excluded),
                    format_rational(self.tallies[excluded]))

        batches: dict[Rational, list[Parcel]] = {}
        for parcel in self.parcels[excluded]:
            batches.setdefault(parcel.transfer_value, []).append(parcel)
        self.parcels[excluded] = []
        if not batches:
            batches[ONE] = []

        steps: list[CountStep] = []
        for number, (tv, parcels) in enumerate(batches.items(), start=1):
            index = self.next_index
            removed = sum((p.credited for p in parcels), ZERO)
            self.tallies[excluded] -= removed

            # one rounding unit per (source parcel, destination)
            credited = [ZERO] * len(self.election.candidates)
            transfers: list[ParcelTransfer] = []
            exhausted_papers = 0
            exhausted_value = ZERO
            for parcel in parcels:
                moving, exhausting = [], 0
                for bundle in parcel.bundles:
                    dest = self.__next_continuing(bundle)
                    if dest is None:
                        exhausting += bundle.count
                    else:
                        moving.append((parcel, bundle, dest, tv))
                parcel_credited, parcel_transfers, _ = self.__deliver(moving, index, split_by_incoming=False)
                credited = [a + b for a, b in zip(credited, parcel_credited)]
                transfers.extend(parcel_transfers)
                if exhausting:
                    transfers.append(ParcelTransfer(parcel.received_at, exhausting, tv, tv, None, exhausting * tv))
                    exhausted_papers += exhausting
                    exhausted_value += self.__rounded(exhausting * tv)
            steps.append(self.__close_count(
                action=CountAction(ActionKind.EXCLUSION, candidate=excluded, batch=number,
                                   batches=len(batches), batch_tv=tv),
                removed=removed,
                credited=credited,
                transfer_value_used=tv,
                exhausted_papers=exhausted_papers,
                exhausted_value=exhausted_value,
                transfers=transfers,
                excluded_now=excluded if number == 1 else None,
                exclusion_margin=margin if number == 1 else None,
            ))
            if self.finished:
                break
        return steps
    # endregion

    # region Elections
    def __close_count(self, action: CountAction, removed: Rational, credited: list[Rational],
                      transfer_value_used: Optional[Rational], exhausted_papers: int,
                      exhausted_value: Rational, transfers: Sequence[ParcelTransfer] = (),
                      surplus_fraction: Optional[Rational] = None,
                      exhausted_aggregate: Optional[Rational] = None,
                      excluded_now: Optional[int] = None,
                      exclusion_margin: Optional[Rational] = None) -> CountStep:
        """ Records the count, then runs Steps 3 to 5 against the new tallies """
        index = self.next_index
        self.history.append(tuple(self.tallies))
        elected_now = self.__elect_quota_holders()
        if not self.finished and check_termination(self.status, self.election.vacancies) == Termination.FILL_REMAINING:
            elected_now.extend(self.__fill_remaining())

        step = CountStep(
            index=index,
            action=action,
            removed=removed,
            credited=tuple(credited),
            transfer_value_used=transfer_value_used,
            exhausted_papers=exhausted_papers,
            exhausted_value=exhausted_value,
            rounding_loss=removed - sum(credited, ZERO) - exhausted_value,
            elected_now=tuple(elected_now),
            excluded_now=excluded_now,
            tallies=tuple(self.tallies),
            transfers=tuple(transfers),
            surplus_fraction=surplus_fraction,
            exhausted_aggregate=exhausted_aggregate,
            exclusion_margin=exclusion_margin,
        )
        self.steps.append(step)
        logger.debug("Count %d %s: credited %s, exhausted %s, loss %s", index, action.kind.value,
                     [format_rational(c) for c in credited], format_rational(exhausted_value),
                     format_rational(step.rounding_loss))
        return step

    def __elect(self, candidate: int) -> None:
        self.status[candidate] = CandidateStatus.ELECTED
        self.elected.append(candidate)
        self.order_elected[candidate] = len(self.elected)
        logger.info("%s elected #%d with %s", self.__name(candidate), len(self.elected),
                    format_rational(self.tallies[candidate]))

    def __elect_quota_holders(self) -> list[int]:
        reached = [c for c in range(len(self.status))
                   if self.__is_continuing(c) and self.tallies[c] >= self.quota.value]
        elected_now: list[int] = []
        for candidate in self.__order_by_tally(reached, descending=True):
            self.__elect(candidate)
            elected_now.append(candidate)
            if self.tallies[candidate] > self.quota.value:
                self.pending_surpluses.append(candidate)
            if check_termination(self.status, self.election.vacancies) == Termination.ELECTED_ALL:
                self.finished = True
                break
        return elected_now

    def __fill_remaining(self) -> list[int]:
        continuing = [c for c in range(len(self.status)) if self.__is_continuing(c)]
        ordered = self.__order_by_tally(continuing, descending=True)
        for candidate in ordered:
            self.__elect(candidate)
        self.finished = True
        return ordered
    # endregion


def run_count(e: Election, r: Ruleset) -> CountTranscript:
    """ Counts the election under the ruleset; the transcript depends only on (e, r) """
    return Counter(e, r).run()
