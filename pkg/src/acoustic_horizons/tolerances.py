"""Default numeric tolerances, scalable as a group from the CLI."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    """Tolerance bundle shared across the geometry and search routines.

    ergo : on-surface tolerance for |Delta| (degenerate-locus membership)
    char : characteristic-residual tolerance for curves
    cycle : fixed-point residual |P(r*) - r*| for limit cycles
    null : Hamiltonian residual budget along rays
    rk_rtol / rk_atol : adaptive integrator tolerances
    """

    ergo: float = 1e-8
    char: float = 1e-6
    cycle: float = 1e-8
    null: float = 1e-8
    rk_rtol: float = 1e-10
    rk_atol: float = 1e-10

    def scaled(self, factor: float) -> "Tolerances":
        if factor <= 0:
            raise ValueError("tolerance scale must be positive")
        return replace(
            self,
            ergo=self.ergo * factor,
            char=self.char * factor,
            cycle=self.cycle * factor,
            null=self.null * factor,
            rk_rtol=self.rk_rtol * factor,
            rk_atol=self.rk_atol * factor,
        )


DEFAULT_TOL = Tolerances()
