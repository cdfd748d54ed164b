"""Numerical tolerances and finite-difference step settings."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    feasibility: float = 1e-8
    duality_gap: float = 1e-7
    # threshold for "equals 1" / "equals 0" / sign decisions
    classify: float = 1e-6
    pivot: float = 1e-9
    reduced_cost: float = 1e-10
    # 0 means derive the cap from the problem size
    max_pivots: int = 0

    def __post_init__(self):
        for name in ("feasibility", "duality_gap", "classify", "pivot", "reduced_cost"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name} must be positive")


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class StepConfig:
    """Finite-difference step selection.

    The step starts at ``t_initial`` and is halved until the supporting
    hyperplane check passes, at most ``max_halvings`` times.
    """

    t_initial: float = 1e-6
    max_halvings: int = 20
    # |phi* - 1| allowed when checking that both points share a face
    validation_tol: float = 1e-7

    def __post_init__(self):
        if not self.t_initial > 0:
            raise ValueError("t_initial must be positive")
        if self.max_halvings < 1:
            raise ValueError("max_halvings must be at least 1")
        if not self.validation_tol > 0:
            raise ValueError("validation_tol must be positive")
