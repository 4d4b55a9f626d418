"""
Hypothesis-based tests for the count engine.
"""

from fractions import Fraction

from hypothesis import given, settings, strategies as st

from analysis import detect_negative, detect_value_increase
from engine import ActionKind, run_count
from error_handler import SurplusFractionError
from model import Election, make_election
from parser import parse_election
from rational import (ArithmeticOp, RoundingMode, format_rational, parse_rational,
                      rational_arithmetic, round_down)
from rules import PRESETS, Quota, compute_quota, get_preset, surplus_fraction_nsw, with_overrides
from transcript_io import serialize_transcript, write_election_text

Rationals = st.fractions(min_value=-10 ** 6, max_value=10 ** 6, max_denominator=10 ** 6)
Modes = st.sampled_from(list(RoundingMode))
Names = st.text(alphabet="AbZ09 _-'.#\\\":,>", min_size=1, max_size=10)

UNIT = {
    RoundingMode.EXACT: Fraction(0),
    RoundingMode.FLOOR_INTEGER: Fraction(1),
    RoundingMode.FLOOR_6DP: Fraction(1, 10 ** 6),
}


@st.composite
def preference_lists(draw, n):
    order = draw(st.permutations(range(n)))
    return list(order[:draw(st.integers(1, n))])


@st.composite
def elections(draw, max_candidates=5, vacancies=None):
    n = draw(st.integers(2, max_candidates))
    v = vacancies if vacancies is not None else draw(st.integers(1, n - 1))
    ballots = draw(st.lists(st.tuples(preference_lists(n), st.integers(1, 12)), min_size=1, max_size=10))
    return make_election("generated", [f"C{i}" for i in range(n)], v, ballots)


def count_or_none(e, ruleset):
    """ NSW counts can legitimately stop on a zero surplus-fraction denominator """
    try:
        return run_count(e, ruleset)
    except SurplusFractionError:
        return None


def irv_winner(e: Election) -> int:
    """
    Single-winner instant runoff by repeated recount: exclude the lowest,
    breaking ties on the most recent earlier round where they differed,
    then on lowest index.
    """
    n = len(e.candidates)
    continuing = set(range(n))
    majority = e.total_papers // 2 + 1
    rounds: list[list[int]] = []
    while True:
        tallies = [0] * n
        for ballot in e.ballots:
            for pref in ballot.preferences:
                if pref in continuing:
                    tallies[pref] += ballot.multiplicity
                    break
        rounds.append(tallies)

        for c in continuing:
            if tallies[c] >= majority:
                return c
        if len(continuing) == 1:
            return next(iter(continuing))

        lowest = min(tallies[c] for c in continuing)
        tied = sorted(c for c in continuing if tallies[c] == lowest)
        back = len(rounds) - 2
        while len(tied) > 1 and back >= 0:
            least = min(rounds[back][c] for c in tied)
            tied = [c for c in tied if rounds[back][c] == least]
            back -= 1
        continuing.remove(tied[0])


# region Arithmetic
@settings(max_examples=10000, deadline=None)
@given(st.integers(-10 ** 9, 10 ** 9), st.integers(1, 10 ** 9),
       st.integers(-10 ** 9, 10 ** 9), st.integers(1, 10 ** 9))
def test_addition_matches_cross_multiplication(a, b, c, d):
    """
    Sums agree with integer cross-multiplication.
    """
    total = rational_arithmetic(Fraction(a, b), Fraction(c, d), ArithmeticOp.ADD)
    assert total.numerator * b * d == (a * d + c * b) * total.denominator


@settings(max_examples=10000, deadline=None)
@given(st.integers(-10 ** 9, 10 ** 9), st.integers(1, 10 ** 9),
       st.integers(-10 ** 9, 10 ** 9), st.integers(1, 10 ** 9))
def test_compare_matches_cross_multiplication(a, b, c, d):
    cross = a * d - c * b
    expected = (cross > 0) - (cross < 0)
    assert rational_arithmetic(Fraction(a, b), Fraction(c, d), ArithmeticOp.COMPARE) == expected


@given(Rationals, Modes)
def test_round_down_is_a_floor(x, mode):
    """
    ``round_down`` never rounds up, is idempotent, and moves by less than one grid step.
    """
    r = round_down(x, mode)
    assert r <= x
    assert round_down(r, mode) == r
    assert x - r < UNIT[mode] or x == r


@given(Rationals)
def test_text_codec_is_exact(x):
    assert parse_rational(format_rational(x)) == x


@given(Names.filter(str.strip), st.lists(Names, min_size=2, max_size=4, unique=True))
def test_written_names_parse_back(title, names):
    """
    Election and candidate names come back from ``write_election_text`` unchanged,
    quotes, backslashes and ``#`` included.
    """
    e = make_election(title, names, 1, [(list(range(len(names))), 2)])
    assert parse_election(write_election_text(e)) == e
# endregion


# region Rules
@settings(max_examples=1000)
@given(st.integers(1, 10 ** 6), st.integers(1, 50))
def test_quota_is_smallest_unreachable_share(papers, vacancies):
    """
    vacancies + 1 candidates can never all hold a quota, but they could one vote lower.
    """
    quota = compute_quota(papers, vacancies).value
    assert (vacancies + 1) * quota > papers
    assert (vacancies + 1) * (quota - 1) <= papers


@given(st.integers(1, 1000), st.integers(1, 1000), st.fractions(min_value=0, max_value=10 ** 4))
def test_nsw_fraction_negative_when_exhausted_exceeds_tally(quota, surplus, excess):
    tally = Fraction(quota + surplus)
    exhausted = tally + excess
    if excess == 0:
        return
    for cap in (True, False):
        assert surplus_fraction_nsw(tally, Quota(quota), exhausted, cap) < 0
# endregion


# region Counting
@settings(max_examples=500, deadline=None)
@given(elections())
def test_conservation_every_preset(e):
    """
    At every count, tallies plus everything exhausted or lost so far equal the papers cast.
    """
    for ruleset in PRESETS.values():
        t = count_or_none(e, ruleset)
        if t is None:
            continue
        leaked = Fraction(0)
        for step in t.steps:
            assert step.removed == sum(step.credited, Fraction(0)) + step.exhausted_value + step.rounding_loss
            if step.action.kind != ActionKind.FIRST_PREFERENCES:
                leaked += step.exhausted_value + step.rounding_loss
            assert sum(step.tallies, Fraction(0)) + leaked == e.total_papers
        assert len(t.winners) == e.vacancies
        assert len(set(t.winners)) == e.vacancies


@settings(max_examples=300, deadline=None)
@given(elections(), st.sampled_from(sorted(PRESETS)))
def test_exact_rounding_loses_nothing(e, preset):
    t = count_or_none(e, with_overrides(get_preset(preset), rounding="exact"))
    if t is None:
        return
    assert all(step.rounding_loss == 0 for step in t.steps)


@settings(max_examples=200, deadline=None)
@given(elections(), st.sampled_from(sorted(PRESETS)))
def test_counting_is_deterministic(e, preset):
    first = count_or_none(e, get_preset(preset))
    second = count_or_none(e, get_preset(preset))
    if first is None:
        assert second is None
        return
    assert serialize_transcript(first) == serialize_transcript(second)


@settings(max_examples=300, deadline=None)
@given(elections(max_candidates=6, vacancies=1))
def test_single_vacancy_matches_instant_runoff(e):
    """
    With one vacancy every preset reduces to instant runoff.
    """
    expected = irv_winner(e)
    for ruleset in PRESETS.values():
        assert run_count(e, ruleset).winners == (expected,)


@settings(max_examples=300, deadline=None)
@given(elections())
def test_rounding_loss_is_never_negative(e):
    """
    Outside the NSW formula, no count loses a negative amount, exclusions included.
    """
    for preset in ("federal", "victoria", "act_pre2020", "act2020"):
        t = run_count(e, get_preset(preset))
        for step in t.steps:
            assert step.rounding_loss >= 0, (preset, step.index)
        assert len(detect_negative(t)) == 0


@settings(max_examples=300, deadline=None)
@given(elections())
def test_weighted_gregory_never_increases_value(e):
    """
    Scaling every paper by surplus over total value cannot push a paper above its incoming value.
    """
    t = run_count(e, with_overrides(get_preset("federal"), surplus_method="gregory_weighted"))
    assert len(detect_value_increase(t)) == 0
# endregion
