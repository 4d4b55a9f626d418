"""
Analysis Module for the STV Audit Engine

Anomaly detectors over finished transcripts, the monotonicity manipulation
search, and side-by-side comparison of rulesets on one election.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

from engine import ActionKind, CountTranscript, run_count
from error_handler import ManipulationSearchError
from model import Ballot, Election
from rational import format_rational
from rules import Ruleset

logger = logging.getLogger(__name__)


class FindingKind(Enum):
    NEGATIVE_TRANSFER_VALUE = "negative_transfer_value"
    NEGATIVE_TALLY = "negative_tally"
    VALUE_INCREASE = "value_increase"
    MONOTONICITY_VIOLATION = "monotonicity_violation"
    RULESET_DISAGREEMENT = "ruleset_disagreement"


@dataclass(frozen=True)
class Finding:
    """
    One anomaly. `evidence` holds rationals already formatted as "n/d"
    strings so a finding can be written out as-is.
    """
    kind: FindingKind
    count_index: Optional[int]
    candidates: tuple[int, ...]
    evidence: dict = field(default_factory=dict, compare=False)

    def describe(self, election: Election) -> str:
        names = ", ".join(election.names(self.candidates)) or "-"
        where = f"count {self.count_index}" if self.count_index is not None else "whole count"
        return f"{self.kind.value} at {where} [{names}]"


@dataclass(frozen=True)
class AnomalyReport:
    findings: tuple[Finding, ...]

    def __len__(self) -> int:
        return len(self.findings)

    def of_kind(self, kind: FindingKind) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.kind == kind)


@dataclass(frozen=True)
class SwapManipulation:
    donor: int
    recipient: int
    papers_moved: int
    description: str
    modified: Election = field(compare=False, repr=False, default=None)
    winners_before: tuple[int, ...] = ()
    winners_after: tuple[int, ...] = ()

    def to_finding(self) -> Finding:
        return Finding(
            FindingKind.MONOTONICITY_VIOLATION,
            None,
            (self.donor, self.recipient),
            {"papers_moved": self.papers_moved, "description": self.description},
        )


# region Detectors
def detect_negative(t: CountTranscript) -> AnomalyReport:
    """ One finding per count with a negative transfer value or a negative tally """
    findings: list[Finding] = []
    for step in t.steps:
        negative_tvs = [tr for tr in step.transfers if tr.outgoing_tv < 0]
        negative_tallies = [c for c, tally in enumerate(step.tallies) if tally < 0]
        if not negative_tvs and not negative_tallies:
            continue

        kind = FindingKind.NEGATIVE_TRANSFER_VALUE if negative_tvs else FindingKind.NEGATIVE_TALLY
        involved = {tr.destination for tr in negative_tvs if tr.destination is not None}
        involved.update(negative_tallies)
        if step.action.candidate is not None:
            involved.add(step.action.candidate)
        evidence = {
            "transfer_values": sorted({format_rational(tr.outgoing_tv) for tr in negative_tvs}),
            "tallies": {t.election.candidates[c].name: format_rational(step.tallies[c])
                        for c in negative_tallies},
        }
        if step.surplus_fraction is not None:
            evidence["surplus_fraction"] = format_rational(step.surplus_fraction)
        findings.append(Finding(kind, step.index, tuple(sorted(involved)), evidence))
    return AnomalyReport(tuple(findings))


def detect_value_increase(t: CountTranscript) -> AnomalyReport:
    """
    One finding per surplus count, source parcel and incoming value whose
    papers left worth more than they came in
    """
    findings: list[Finding] = []
    for step in t.steps:
        if step.action.kind != ActionKind.SURPLUS:
            continue
        by_parcel: dict[tuple, list] = {}
        for tr in step.transfers:
            if tr.destination is not None and tr.outgoing_tv > tr.incoming_tv:
                by_parcel.setdefault((tr.source_received_at, tr.incoming_tv), []).append(tr)
        for (received_at, incoming_tv), transfers in by_parcel.items():
            candidates = {step.action.candidate} | {tr.destination for tr in transfers}
            findings.append(Finding(
                FindingKind.VALUE_INCREASE,
                step.index,
                tuple(sorted(candidates)),
                {
                    "parcel_received_at": received_at,
                    "incoming_tv": format_rational(incoming_tv),
                    "outgoing_tv": format_rational(transfers[0].outgoing_tv),
                    "papers": sum(tr.papers for tr in transfers),
                },
            ))
    return AnomalyReport(tuple(findings))


DETECTORS = {
    "negative": detect_negative,
    "value_increase": detect_value_increase,
}


def run_detectors(t: CountTranscript, only: Optional[Sequence[str]] = None) -> AnomalyReport:
    findings: list[Finding] = []
    for name, detector in DETECTORS.items():
        if only and name not in only:
            continue
        findings.extend(detector(t).findings)
    return AnomalyReport(tuple(findings))
# endregion


# region Manipulation search
def _ranks_donor_above(prefs: tuple[int, ...], donor: int, beneficiary: int) -> bool:
    return donor in prefs and beneficiary in prefs and prefs.index(donor) < prefs.index(beneficiary)


def swap_preferences(e: Election, donor: int, beneficiary: int, papers: int) -> Election:
    """
    Swaps donor and beneficiary on the first `papers` papers ranking donor
    above beneficiary, in input order. A bundle is split when only part of
    its multiplicity is needed, so the paper count never changes.
    """
    ballots: list[Ballot] = []
    remaining = papers
    for ballot in e.ballots:
        prefs = ballot.preferences
        if remaining == 0 or not _ranks_donor_above(prefs, donor, beneficiary):
            ballots.append(ballot)
            continue
        taken = min(remaining, ballot.multiplicity)
        remaining -= taken
        swapped = tuple(beneficiary if p == donor else donor if p == beneficiary else p for p in prefs)
        ballots.append(Ballot(swapped, taken))
        if ballot.multiplicity > taken:
            ballots.append(Ballot(prefs, ballot.multiplicity - taken))
    return replace(e, ballots=tuple(ballots))


def search_monotonicity(e: Election, r: Ruleset, donor: int, beneficiary: int,
                        max_papers: int) -> Optional[SwapManipulation]:
    """
    Finds the smallest m such that swapping donor and beneficiary on m
    papers gets the donor elected. Winner membership is not monotone in m,
    so every m from 1 to max_papers is tried in turn; None when none works.
    """
    baseline = run_count(e, r)
    if donor in baseline.winners:
        raise ManipulationSearchError(f"{e.candidates[donor].name} already wins; nothing to search for")
    available = sum(b.multiplicity for b in e.ballots if _ranks_donor_above(b.preferences, donor, beneficiary))
    if max_papers < 1:
        raise ManipulationSearchError("max papers must be at least 1")
    if max_papers > available:
        raise ManipulationSearchError(
            f"only {available} papers rank {e.candidates[donor].name} above "
            f"{e.candidates[beneficiary].name}; cannot move {max_papers}")

    for papers in range(1, max_papers + 1):
        modified = swap_preferences(e, donor, beneficiary, papers)
        outcome = run_count(modified, r)
        logger.debug("Swapping %d paper(s): winners %s", papers, e.names(outcome.winners))
        if donor not in outcome.winners:
            continue

        # Re-verify from scratch before reporting
        confirmed = run_count(swap_preferences(e, donor, beneficiary, papers), r)
        if donor not in confirmed.winners:
            continue
        description = (
            f"Swapping {e.candidates[donor].name} and {e.candidates[beneficiary].name} on {papers} "
            f"paper(s) elects {e.candidates[donor].name} (winners {', '.join(e.names(baseline.winners))} -> "
            f"{', '.join(e.names(confirmed.winners))})"
        )
        logger.info(description)
        return SwapManipulation(donor, beneficiary, papers, description, modified,
                                baseline.winners, confirmed.winners)
    return None
# endregion


# region Ruleset comparison
@dataclass(frozen=True)
class RulesetComparison:
    rulesets: tuple[str, ...]
    winners: dict
    agreement: dict
    findings: tuple[Finding, ...]

    @property
    def unanimous(self) -> bool:
        return len({frozenset(w) for w in self.winners.values()}) <= 1


def compare_rulesets(e: Election, rulesets: Sequence[Ruleset]) -> RulesetComparison:
    """ Counts the election once per ruleset and records every pair whose winner sets differ """
    winners = {r.name: run_count(e, r).winners for r in rulesets}
    names = tuple(r.name for r in rulesets)
    agreement: dict = {}
    findings: list[Finding] = []
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            same = set(winners[a]) == set(winners[b])
            agreement[(a, b)] = same
            if not same:
                differing = set(winners[a]) ^ set(winners[b])
                findings.append(Finding(
                    FindingKind.RULESET_DISAGREEMENT,
                    None,
                    tuple(sorted(differing)),
                    {"rulesets": [a, b], a: e.names(winners[a]), b: e.names(winners[b])},
                ))
    return RulesetComparison(names, winners, agreement, tuple(findings))
# endregion
