"""Directed decimal rounding for displayed bounds.

Upper bounds are shown rounded up and lower bounds rounded down, so a
printed number is never stronger than the one computed.
"""

from decimal import ROUND_CEILING, ROUND_FLOOR, ROUND_HALF_EVEN, Decimal

DISPLAY_PLACES = 4


def _quantize(x: float, places: int, mode: str) -> float:
    q = Decimal(1).scaleb(-places)
    return float(Decimal(x).quantize(q, rounding=mode))


def round_up(x: float, places: int = DISPLAY_PLACES) -> float:
    return _quantize(x, places, ROUND_CEILING)


def round_down(x: float, places: int = DISPLAY_PLACES) -> float:
    return _quantize(x, places, ROUND_FLOOR)


def round_nearest(x: float, places: int = DISPLAY_PLACES) -> float:
    return _quantize(x, places, ROUND_HALF_EVEN)
