"""
Exact Rational Arithmetic Module for the STV Audit Engine

Tallies, transfer values and surplus fractions are all held as
fractions.Fraction: signed, arbitrary precision and always in lowest
terms. This module adds the legislated rounding modes and the exact
text codec used by transcripts.
"""

import math
from enum import Enum
from fractions import Fraction
from typing import Union

Rational = Fraction

SIX_PLACES = Fraction(1, 10 ** 6)


class RoundingMode(Enum):
    """How credited amounts are rounded at each count."""
    EXACT = "exact"
    FLOOR_INTEGER = "floor_integer"
    FLOOR_6DP = "floor_6dp"


class ArithmeticOp(Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"
    COMPARE = "compare"


def round_down(x: Rational, mode: RoundingMode) -> Rational:
    """ Rounds x down onto the grid of the given mode (never up, negatives included) """
    match mode:
        case RoundingMode.EXACT:
            return x
        case RoundingMode.FLOOR_INTEGER:
            return Fraction(math.floor(x))
        case RoundingMode.FLOOR_6DP:
            return Fraction(math.floor(x / SIX_PLACES)) * SIX_PLACES
    raise ValueError(f"Unknown rounding mode {mode}")


def on_grid(x: Rational, mode: RoundingMode) -> bool:
    return round_down(x, mode) == x


def rational_arithmetic(a: Rational, b: Rational, op: ArithmeticOp) -> Union[Rational, int]:
    """
    Exact field arithmetic on two rationals.

    COMPARE returns -1, 0 or 1. DIV by zero raises ZeroDivisionError; the
    engine wraps the one place it can occur in a SurplusFractionError.
    """
    match op:
        case ArithmeticOp.ADD:
            return a + b
        case ArithmeticOp.SUB:
            return a - b
        case ArithmeticOp.MUL:
            return a * b
        case ArithmeticOp.DIV:
            if b == 0:
                raise ZeroDivisionError(f"division of {format_rational(a)} by zero")
            return a / b
        case ArithmeticOp.COMPARE:
            return (a > b) - (a < b)
    raise ValueError(f"Unknown arithmetic op {op}")


# region Text codec
def format_rational(x: Rational) -> str:
    """ "n/d" in lowest terms, or "n" when the denominator is 1 """
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Rational:
    """ Inverse of format_rational. Decimal strings are rejected. """
    text = text.strip()
    if "." in text or "e" in text.lower():
        raise ValueError(f"Rational '{text}' must be written as n/d, not as a decimal")
    if "/" in text:
        num, _, den = text.partition("/")
        denominator = int(den)
        if denominator <= 0:
            raise ValueError(f"Rational '{text}' needs a positive denominator")
        return Fraction(int(num), denominator)
    return Fraction(int(text))


def to_decimal_string(x: Rational, places: int = 6) -> str:
    """ Display helper; truncates toward negative infinity, like the legislated rounding """
    scale = 10 ** places
    scaled = math.floor(x * scale)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), scale)
    if places == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{places}d}"
# endregion
