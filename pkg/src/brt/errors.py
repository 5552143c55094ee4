"""Shared exception types."""

from __future__ import annotations


class LanguageMismatchError(ValueError):
    """Two structures were combined but their languages differ."""


class InfeasibleError(RuntimeError):
    """An enumeration would exceed the configured node-count cap.

    Carries the cap and the size estimate so callers can report both.
    """

    def __init__(self, estimate: int, cap: int, what: str = "enumeration"):
        self.estimate = estimate
        self.cap = cap
        self.what = what
        super().__init__(f"{what} needs ~{estimate} nodes, cap is {cap}")
