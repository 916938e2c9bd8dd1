"""Bisection for monotone functions."""

from collections.abc import Callable
from dataclasses import dataclass


@dataclass(frozen=True)
class Bracket:
    """Final bisection bracket: ``func(upper) <= value`` and, unless collapsed,
    ``func(lower) > value``."""

    lower: float
    upper: float

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)


def invert_nonincreasing(
    func: Callable[[float], float],
    value: float,
    lower: float,
    upper: float,
    tolerance: float = 1e-6,
    max_iter: int = 60,
) -> Bracket | None:
    """Locate the smallest x in [lower, upper] with ``func(x) <= value``.

    Returns a collapsed bracket at ``lower`` when ``func(lower)`` already satisfies the
    target, and None when ``func(upper)`` does not.
    """
    if func(lower) <= value:
        return Bracket(lower, lower)
    if func(upper) > value:
        return None

    lo, hi = lower, upper
    for _ in range(max_iter):
        if hi - lo < tolerance:
            break
        mid = 0.5 * (lo + hi)
        if func(mid) > value:
            lo = mid
        else:
            hi = mid
    return Bracket(lo, hi)


def expand_upper(
    func: Callable[[float], float],
    value: float,
    start: float,
    limit: float,
) -> float | None:
    """Double ``start`` until ``func`` drops to ``value`` or the limit is passed."""
    x = start
    while x <= limit:
        if func(x) <= value:
            return x
        x *= 2.0
    return None
