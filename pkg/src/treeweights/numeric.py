"""Number handling shared by the exact and float arithmetic modes.

Weights are plain Python numbers.  Exact mode uses :class:`fractions.Fraction`
(plain ints are accepted and stay exact); float mode uses built-in floats.
The constants below are Fractions, so ``HALF * x`` keeps a Fraction exact and
degrades to float for float input — the same formula serves both modes.
"""

from __future__ import annotations

from decimal import Decimal, InvalidOperation
from fractions import Fraction

HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)
TWO_THIRDS = Fraction(2, 3)

MODES = ("rational", "float")


def is_exact(value) -> bool:
    """True for ints and Fractions, False for floats."""
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def exact_fraction(value) -> Fraction:
    """Convert *value* to a Fraction, reading floats via their shortest repr.

    ``exact_fraction(0.1) == Fraction(1, 10)``, which is what a human who
    typed ``0.1`` meant; use ``Fraction(value)`` directly for the exact
    binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(Decimal(repr(value)))
    if isinstance(value, str):
        return parse_number(value, "rational")
    raise TypeError(f"cannot convert {value!r} to a Fraction")


def parse_number(token: str, mode: str):
    """Parse a numeric token as ``p/q``, decimal or scientific notation.

    Returns a Fraction in rational mode and a float in float mode.
    Raises ValueError on malformed tokens or unknown mode.
    """
    if mode not in MODES:
        raise ValueError(f"unknown arithmetic mode {mode!r}")
    token = token.strip()
    if "/" in token:
        num, _, den = token.partition("/")
        value = Fraction(int(num), int(den))
    else:
        try:
            value = Fraction(Decimal(token))
        except (InvalidOperation, ValueError) as exc:
            raise ValueError(f"bad numeric token {token!r}") from exc
    return value if mode == "rational" else float(value)


def format_number(value) -> str:
    """Lossless text form: ``p/q`` for Fractions, shortest repr for floats."""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, Fraction):
        return str(value)  # "p/q", or "p" when the denominator is 1
    return str(int(value))


def midrange(lo, hi):
    """Midpoint of an observed [lo, hi] spread; minimises worst-case error."""
    return HALF * (lo + hi)
