"""Model parameters and truncation policy.

The Euclidean action is  E[phi] = int_0^beta [ (c/2) phi'^2 + b phi^2 + a phi^4 ] dtau
with the path pinned at phi(0) = 0 and phi(beta) = x_f.  All derived frequency
quantities are functions of gamma^2 = 2b/c only, so b may take either sign.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ModelParams:
    """Physical inputs of the quartic oscillator propagator."""

    a: float          # quartic coupling, >= 0
    b: float          # quadratic coefficient, sign-free
    c: float          # kinetic coefficient, > 0
    beta: float       # total imaginary time, > 0
    x_f: float        # endpoint phi(beta)
    x_i: float = 0.0  # start point, fixed at the origin in this artifact

    def __post_init__(self):
        if self.a < 0:
            raise ValueError(f"quartic coupling a must be >= 0, got {self.a}")
        if self.c <= 0:
            raise ValueError(f"kinetic coefficient c must be > 0, got {self.c}")
        if self.beta <= 0:
            raise ValueError(f"total time beta must be > 0, got {self.beta}")
        if self.x_i != 0.0:
            raise ValueError("this artifact evaluates paths starting at the origin (x_i = 0)")

    @property
    def gamma_sq(self) -> float:
        """Signed squared frequency gamma^2 = 2b/c."""
        return 2.0 * self.b / self.c


@dataclass(frozen=True)
class TruncationPolicy:
    """All cutoffs and tolerances in one place.

    poincare_order is the asymptotic-expansion order (number of 1/z^2 terms
    kept beyond the leading 1); series_cutoff caps every infinite k-sum;
    p_max caps the correction order of the anharmonic polynomial factor.
    """

    poincare_order: int = 3
    p_max: int = 2
    series_cutoff: int = 64
    quad_rel_tol: float = 1e-10
    quad_abs_tol: float = 1e-12

    def __post_init__(self):
        if self.poincare_order < 0:
            raise ValueError("poincare_order must be >= 0")
        if self.p_max < 0:
            raise ValueError("p_max must be >= 0")
        if self.series_cutoff < 1:
            raise ValueError("series_cutoff must be >= 1")
        if self.quad_rel_tol <= 0 or self.quad_abs_tol <= 0:
            raise ValueError("tolerances must be > 0")


DEFAULT_POLICY = TruncationPolicy()
