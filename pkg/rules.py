"""
Rules Module for the STV Audit Engine

Ruleset configuration plus the per-jurisdiction formulas: Droop quota, the
NSW surplus fraction, and the unified and weighted transfer values.
"""

from dataclasses import asdict, dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Optional

from error_handler import SurplusFractionError, UnknownRulesetError
from rational import Rational, RoundingMode, format_rational


class SurplusMethod(Enum):
    """Which papers leave an elected candidate, and at what value."""
    LAST_PARCEL = "last_parcel"
    RANDOM_SAMPLE = "random_sample"
    GREGORY_WEIGHTED = "gregory_weighted"
    UNIFIED_TV = "unified_tv"


@dataclass(frozen=True)
class Ruleset:
    """
    A named combination of counting choices.

    Attributes:
        name: Preset identifier
        surplus_method: How surplus papers are chosen and valued
        rounding: Rounding applied to every credited amount
        exhausted_reduce_denominator: Exhausted papers change the value of the others
        batch_by_incoming_tv: Round each incoming-transfer-value batch separately
        sample_seed: Seed for random_sample (unsigned 64-bit)
        surplus_cap_at_one: A surplus fraction exceeding 1 is replaced by 1
    """
    name: str
    surplus_method: SurplusMethod
    rounding: RoundingMode
    exhausted_reduce_denominator: bool
    batch_by_incoming_tv: bool
    sample_seed: int = 0
    surplus_cap_at_one: bool = False

    def __post_init__(self) -> None:
        if not 0 <= self.sample_seed < 2 ** 64:
            raise ValueError(f"sample_seed {self.sample_seed} is not an unsigned 64-bit integer")

    def to_json(self) -> dict:
        data = asdict(self)
        data["surplus_method"] = self.surplus_method.value
        data["rounding"] = self.rounding.value
        return data

    @classmethod
    def from_json(cls, data: dict) -> 'Ruleset':
        return cls(
            name=data["name"],
            surplus_method=SurplusMethod(data["surplus_method"]),
            rounding=RoundingMode(data["rounding"]),
            exhausted_reduce_denominator=bool(data["exhausted_reduce_denominator"]),
            batch_by_incoming_tv=bool(data["batch_by_incoming_tv"]),
            sample_seed=int(data.get("sample_seed", 0)),
            surplus_cap_at_one=bool(data.get("surplus_cap_at_one", False)),
        )


PRESETS: dict[str, Ruleset] = {
    "federal": Ruleset("federal", SurplusMethod.UNIFIED_TV, RoundingMode.FLOOR_INTEGER,
                       exhausted_reduce_denominator=False, batch_by_incoming_tv=False),
    "nsw_local": Ruleset("nsw_local", SurplusMethod.GREGORY_WEIGHTED, RoundingMode.FLOOR_INTEGER,
                         exhausted_reduce_denominator=True, batch_by_incoming_tv=True,
                         surplus_cap_at_one=True),
    "nsw_local_sample": Ruleset("nsw_local_sample", SurplusMethod.RANDOM_SAMPLE, RoundingMode.FLOOR_INTEGER,
                                exhausted_reduce_denominator=True, batch_by_incoming_tv=True,
                                surplus_cap_at_one=True),
    "act_pre2020": Ruleset("act_pre2020", SurplusMethod.LAST_PARCEL, RoundingMode.FLOOR_INTEGER,
                           exhausted_reduce_denominator=True, batch_by_incoming_tv=True,
                           surplus_cap_at_one=True),
    "act2020": Ruleset("act2020", SurplusMethod.LAST_PARCEL, RoundingMode.FLOOR_6DP,
                       exhausted_reduce_denominator=True, batch_by_incoming_tv=True,
                       surplus_cap_at_one=True),
    "victoria": Ruleset("victoria", SurplusMethod.UNIFIED_TV, RoundingMode.FLOOR_INTEGER,
                        exhausted_reduce_denominator=False, batch_by_incoming_tv=False),
}


def get_preset(name: str) -> Ruleset:
    preset = PRESETS.get(name)
    if preset is None:
        raise UnknownRulesetError(name, sorted(PRESETS))
    return preset


def with_overrides(ruleset: Ruleset, surplus_method: Optional[str] = None,
                   rounding: Optional[str] = None, sample_seed: Optional[int] = None) -> Ruleset:
    """ Returns a copy of the ruleset with the given choices replaced and a name saying so """
    changes: dict = {}
    suffix: list[str] = []
    if surplus_method is not None:
        changes["surplus_method"] = SurplusMethod(surplus_method)
        suffix.append(surplus_method)
    if rounding is not None:
        changes["rounding"] = RoundingMode(rounding)
        suffix.append(rounding)
    if sample_seed is not None:
        changes["sample_seed"] = sample_seed
        suffix.append(f"seed{sample_seed}")
    if not changes:
        return ruleset
    changes["name"] = "+".join([ruleset.name] + suffix)
    return replace(ruleset, **changes)


@dataclass(frozen=True)
class Quota:
    value: int


def compute_quota(total_papers: int, vacancies: int) -> Quota:
    """ Droop quota: the smallest tally vacancies + 1 candidates cannot all reach """
    if total_papers < 1 or vacancies < 1:
        raise ValueError("quota needs at least one paper and one vacancy")
    return Quota(total_papers // (vacancies + 1) + 1)


def surplus_fraction_nsw(V: Rational, Q: Quota, E: Rational, cap: bool,
                         count_index: int = 0) -> Rational:
    """
    (V - Q) / (V - E), replaced by 1 when cap is set and it exceeds 1.

    V is the rounded tally, E the exact exhausted aggregate, so E can exceed
    V; the fraction is then negative and is returned as such.
    """
    denominator = V - E
    if denominator == 0:
        raise SurplusFractionError(
            f"surplus fraction denominator is zero (tally {format_rational(V)} equals "
            f"exhausted aggregate {format_rational(E)})",
            count_index,
        )
    fraction = (V - Q.value) / denominator
    if cap and fraction > 1:
        return Fraction(1)
    return fraction


def transfer_value_unified(surplus: Rational, ballot_count: int) -> Rational:
    """ Surplus divided by the number of papers, whatever their current value """
    if ballot_count < 1:
        raise ValueError("unified transfer value needs at least one paper")
    return Fraction(surplus) / ballot_count


def transfer_value_weighted(incoming_tv: Rational, surplus: Rational, total_value: Rational) -> Rational:
    if total_value <= 0:
        raise ValueError("weighted transfer value needs a positive total value")
    return incoming_tv * surplus / total_value
