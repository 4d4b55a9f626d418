"""
Core Model Module for the STV Audit Engine

Domain types for elections, ballots and the parcels candidates hold during
a count. Every type here is a frozen value; the engine keeps its own
working state and only produces these at the edges.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from rational import Rational


@dataclass(frozen=True)
class Candidate:
    index: int
    name: str


@dataclass(frozen=True)
class Ballot:
    """
    A preference list shared by `multiplicity` identical papers.

    Attributes:
        preferences: Candidate indices, most preferred first
        multiplicity: Number of identical papers
    """
    preferences: tuple[int, ...]
    multiplicity: int = 1


@dataclass(frozen=True)
class Election:
    name: str
    candidates: tuple[Candidate, ...]
    vacancies: int
    ballots: tuple[Ballot, ...]

    @property
    def total_papers(self) -> int:
        return sum(ballot.multiplicity for ballot in self.ballots)

    def candidate_named(self, name: str) -> Optional[Candidate]:
        for candidate in self.candidates:
            if candidate.name == name:
                return candidate
        return None

    def names(self, indices) -> list[str]:
        return [self.candidates[i].name for i in indices]


class CandidateStatus(Enum):
    CONTINUING = "continuing"
    ELECTED = "elected"
    EXCLUDED = "excluded"


@dataclass(frozen=True)
class PaperBundle:
    """
    `count` identical papers of ballot `ballot_index`, currently sitting with
    the candidate at preference position `cursor`.
    """
    ballot_index: int
    cursor: int
    count: int


@dataclass(frozen=True)
class Parcel:
    """
    Papers received by one candidate at one count at one transfer value.

    `credited` is the rounded amount added to the candidate's tally when the
    parcel arrived; exclusion removes exactly that amount again.
    """
    bundles: tuple[PaperBundle, ...]
    transfer_value: Rational
    received_at: int
    credited: Rational

    @property
    def papers(self) -> int:
        return sum(bundle.count for bundle in self.bundles)

    @property
    def exact_value(self) -> Rational:
        return self.papers * self.transfer_value


@dataclass(frozen=True)
class CandidateState:
    status: CandidateStatus
    tally: Rational
    parcels: tuple[Parcel, ...] = field(default_factory=tuple)
    order_elected: Optional[int] = None


def validate_election(e: Election) -> list[str]:
    """
    Check every Election invariant. Violations are returned as data; an
    empty list means the election can be counted.
    """
    violations: list[str] = []
    n = len(e.candidates)

    for position, candidate in enumerate(e.candidates):
        if candidate.index != position:
            violations.append(f"candidate '{candidate.name}' has index {candidate.index}, expected {position}")
    seen_names: set[str] = set()
    for candidate in e.candidates:
        if candidate.name in seen_names:
            violations.append(f"duplicate candidate name '{candidate.name}'")
        seen_names.add(candidate.name)

    if e.vacancies <= 0:
        violations.append("vacancies must be positive")
    if e.vacancies >= n:
        violations.append("vacancies must be fewer than candidates")

    for ballot_no, ballot in enumerate(e.ballots):
        if ballot.multiplicity <= 0:
            violations.append(f"multiplicity must be positive in ballot {ballot_no}")
        if len(ballot.preferences) == 0:
            violations.append(f"empty preference list in ballot {ballot_no}")
        seen: set[int] = set()
        for pref in ballot.preferences:
            if pref < 0 or pref >= n:
                violations.append(f"unknown candidate {pref} in ballot {ballot_no}")
            elif pref in seen:
                violations.append(f"duplicate candidate {pref} in ballot {ballot_no}")
            seen.add(pref)

    if sum(max(b.multiplicity, 0) for b in e.ballots) <= 0:
        violations.append("election has no papers")

    return violations


def make_election(name: str, candidate_names: list[str], vacancies: int,
                  ballots: list[tuple[list[int], int]]) -> Election:
    """ Convenience constructor used by fixtures and the parser """
    return Election(
        name=name,
        candidates=tuple(Candidate(i, cname) for i, cname in enumerate(candidate_names)),
        vacancies=vacancies,
        ballots=tuple(Ballot(tuple(prefs), count) for prefs, count in ballots),
    )
