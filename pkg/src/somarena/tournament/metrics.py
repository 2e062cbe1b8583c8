"""Evaluation metrics: win rate, survival rounds, prediction deviation."""

from __future__ import annotations

from statistics import mean, pstdev
from typing import Iterable, Optional, Sequence

from somarena.text import parse_number


def prediction_deviation(pairs: Iterable[tuple], action_range: float) -> Optional[float]:
    """Mean absolute error as a percentage of the action range; None when nothing is comparable.

    Pairs whose prediction is not a number count as maximal deviation.
    """
    if action_range is None or action_range <= 0:
        raise ValueError("action range must be positive")
    errors = []
    for predicted, actual in pairs:
        a = parse_number(actual) if not isinstance(actual, (int, float)) else actual
        if a is None:
            continue
        p = parse_number(predicted) if not isinstance(predicted, (int, float)) else predicted
        errors.append(action_range if p is None else min(abs(p - a), action_range))
    if not errors:
        return None
    return 100.0 * mean(errors) / action_range


def mean_std(values: Sequence[Optional[float]]) -> Optional[dict[str, float]]:
    """Mean and population standard deviation of the defined values, or None."""
    xs = [v for v in values if v is not None]
    if not xs:
        return None
    return {"mean": mean(xs), "std": pstdev(xs) if len(xs) > 1 else 0.0, "n": len(xs)}
