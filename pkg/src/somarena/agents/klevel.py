"""Analytic level-k play and best responses for the 0.8-average game."""

from __future__ import annotations

from fractions import Fraction

from somarena.games.base import round_half_away


def clamp(x: int, lo: int, hi: int) -> int:
    return min(max(x, lo), hi)


def g08a_best_response(others_sum: float, n: int, lo: int = 1, hi: int = 100, factor: float = 0.8) -> int:
    """Integer x closest to the fixed point x = factor * (x + others_sum) / n."""
    f = Fraction(str(factor))
    s = Fraction(str(others_sum)) if isinstance(others_sum, float) else Fraction(others_sum)
    # exact rationals keep half-way cases (e.g. 37.5) from drifting below the tie
    return clamp(round_half_away(f * s / (n - f)), lo, hi)


def k_level_choice(k: int, n: int, anchor: int, lo: int = 1, hi: int = 100, factor: float = 0.8) -> int:
    """Level-k choice when every other player is assumed to play level k-1.

    Level 0 plays ``anchor``; level j+1 best-responds to n-1 copies of level j.
    Levels are iterated as exact clamped reals and only the returned choice is
    rounded, so the iterate keeps shrinking to the floor instead of sticking
    where a rounded step maps a value back onto itself (1.5 -> 2 for n = 4).
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if n < 2:
        raise ValueError("n must be at least 2")
    f = Fraction(str(factor))
    x = Fraction(anchor)
    for _ in range(k):
        x = min(max(f * (n - 1) * x / (n - f), Fraction(lo)), Fraction(hi))
    return clamp(round_half_away(x), lo, hi)
