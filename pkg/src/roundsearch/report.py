"""Uniform result record shared by every search routine."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .grid import Point


@dataclass(frozen=True)
class RunReport:
    """Outcome of one algorithm run on one session.

    ``halted_by`` is ``"normal"``, ``"dacs"``, ``"steepest_descent_fixpoint"``,
    ``"zero_found"`` or ``"round_limit"``. ``extras`` carries per-algorithm
    diagnostics such as the realized block schedule.
    """

    solution: Point
    rounds_used: int
    queries_used: int
    halted_by: str = "normal"
    extras: dict[str, Any] = field(default_factory=dict, compare=False)
