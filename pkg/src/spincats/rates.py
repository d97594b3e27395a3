"""Collective and single-particle rates of the cavity implementation.

All inputs share one frequency unit and the outputs come back in it.  The
formulas are the dispersive estimates::

    Upsilon   = (2n + 1) g^2 Omega^2 / (72 kappa Delta^2)
    gamma_eff = gamma Omega^2 / (12 Delta^2)
    C         = 2 g^2 / (kappa gamma)

so that ``gamma_eff N / Upsilon = 12 N / ((2n + 1) C)``.  For a two-sided
cavity with a thermal input port the occupation is
``n = kappa_in n_th / (kappa_in + kappa_out)`` and ``kappa = kappa_in + kappa_out``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["RateParams", "Rates", "rates", "required_cooperativity"]


@dataclass(frozen=True)
class RateParams:
    """Cavity, laser and atom parameters.

    Either ``kappa`` or both of ``kappa_in`` and ``kappa_out`` must be given.
    ``n_th`` selects the two-sided thermal formula for the occupation;
    otherwise ``n_bar`` is used as is.
    """

    g: float
    omega_rabi: float
    delta: float
    gamma: float
    kappa: float | None = None
    n_bar: float = 0.0
    kappa_in: float | None = None
    kappa_out: float | None = None
    n_th: float | None = None

    def __post_init__(self):
        for name in ("g", "omega_rabi", "gamma", "n_bar", "kappa", "kappa_in", "kappa_out", "n_th"):
            value = getattr(self, name)
            if value is not None and (not math.isfinite(value) or value < 0):
                raise ValueError(f"{name} must be finite and non-negative, got {value!r}")
        if self.delta == 0 or not math.isfinite(self.delta):
            raise ValueError("delta must be finite and non-zero")
        two_sided = self.kappa_in is not None or self.kappa_out is not None
        if two_sided and (self.kappa_in is None or self.kappa_out is None):
            raise ValueError("give both kappa_in and kappa_out")
        if self.n_th is not None and not two_sided:
            raise ValueError("n_th needs kappa_in and kappa_out")
        if two_sided and self.kappa is not None and not math.isclose(self.kappa, self.kappa_in + self.kappa_out):
            raise ValueError("kappa disagrees with kappa_in + kappa_out")
        if not two_sided and self.kappa is None:
            raise ValueError("kappa is required")
        if self.total_kappa <= 0:
            raise ValueError("the cavity linewidth must be positive")

    @property
    def total_kappa(self) -> float:
        if self.kappa_in is not None:
            return self.kappa_in + self.kappa_out
        return self.kappa

    @property
    def n_bar_effective(self) -> float:
        if self.n_th is not None:
            return self.kappa_in * self.n_th / self.total_kappa
        return self.n_bar


@dataclass(frozen=True)
class Rates:
    """Derived rates; ``ratio`` is ``gamma_eff N / Upsilon`` for the requested ``N``."""

    upsilon: float
    gamma_eff: float
    cooperativity: float
    n_bar_effective: float
    ratio: float
    n_particles: int

    @property
    def settle_time(self) -> float:
        """``1 / Upsilon``."""
        return math.inf if self.upsilon == 0 else 1 / self.upsilon


def rates(params: RateParams, n_particles: int = 1) -> Rates:
    """Evaluate the dispersive rate formulas."""
    if n_particles < 1:
        raise ValueError("n_particles must be positive")
    n = params.n_bar_effective
    kappa = params.total_kappa
    g2, o2, d2 = params.g**2, params.omega_rabi**2, params.delta**2
    upsilon = (2 * n + 1) * g2 * o2 / (72 * kappa * d2)
    gamma_eff = params.gamma * o2 / (12 * d2)
    coop = math.inf if params.gamma == 0 else 2 * g2 / (kappa * params.gamma)
    if upsilon == 0:
        ratio = math.inf if gamma_eff > 0 else math.nan
    else:
        ratio = gamma_eff * n_particles / upsilon
    return Rates(upsilon, gamma_eff, coop, n, ratio, n_particles)


def required_cooperativity(ratio: float, n_particles: int, n_bar: float = 0.0) -> float:
    """Cooperativity giving ``gamma_eff N / Upsilon = ratio``: ``12 N / ((2n + 1) ratio)``."""
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    return 12 * n_particles / ((2 * n_bar + 1) * ratio)
