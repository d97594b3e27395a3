"""Spin Wigner function on the sphere.

The density matrix is expanded in spherical-tensor operators::

    T_kq = sqrt((2k+1)/(2S+1)) sum_m' <S m'; k q | S m'+q> |S m'+q><S m'|

with ``Tr(T_kq^+ T_k'q') = delta`` and the Wigner function is

    W(theta, phi) = sqrt(4 pi (2S+1)) sum_kq rho_kq Y_kq(theta, phi),   rho_kq = Tr(rho T_kq^+)

normalized so that ``(1/4 pi) int W dOmega = 1``.  Angles refer to the
physical axes: ``theta`` from +z, ``phi`` from +x towards +y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre, sph_harm_y

from .special import clebsch_gordan
from .spin import Axis, StateVector

__all__ = [
    "MIN_THETA_POINTS",
    "MIN_PHI_POINTS",
    "WignerGrid",
    "multipoles",
    "wigner_at",
    "wigner_function",
    "great_circle_values",
    "fringe_count",
]

MIN_THETA_POINTS = 32
MIN_PHI_POINTS = 64


def multipoles(state: StateVector) -> dict[tuple[int, int], complex]:
    """``rho_kq = Tr(rho T_kq^+)`` for ``k <= 2S``."""
    psi = state.to(Axis.Z).amplitudes
    rho = np.outer(psi, psi.conj())
    spin = state.spin
    S = spin.S
    out = {}
    for k in range(int(round(2 * S)) + 1):
        norm = math.sqrt((2 * k + 1) / (2 * S + 1))
        for q in range(-k, k + 1):
            total = 0j
            for b, mb in enumerate(spin.m_values):
                a = b + q
                if 0 <= a < spin.dim:
                    total += rho[a, b] * clebsch_gordan(S, mb, k, q, S, mb + q)
            out[(k, q)] = norm * total
    return out


def wigner_at(state: StateVector, theta, phi) -> np.ndarray:
    """``W`` at arbitrary broadcastable angles."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    total = np.zeros(theta.shape, dtype=complex)
    for (k, q), coeff in multipoles(state).items():
        if coeff != 0:
            total += coeff * sph_harm_y(k, q, theta, phi)
    c = math.sqrt(4 * math.pi * (2 * state.spin.S + 1))
    return c * total.real


@dataclass(frozen=True, eq=False)
class WignerGrid:
    """``values[i, j] = W(thetas[i], phis[j])``.

    ``thetas`` are Gauss-Legendre nodes in ``cos(theta)`` and ``phis`` are
    equally spaced, so :meth:`normalization` is exact for ``2S < 2 n_theta``.
    """

    thetas: np.ndarray = field(repr=False)
    phis: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    theta_weights: np.ndarray = field(repr=False)

    def normalization(self) -> float:
        """``(1/4 pi) int W dOmega`` by quadrature."""
        dphi = 2 * math.pi / self.phis.size
        return float(self.theta_weights @ self.values.sum(axis=1) * dphi / (4 * math.pi))

    def argmax(self) -> tuple[float, float]:
        i, j = np.unravel_index(np.argmax(self.values), self.values.shape)
        return float(self.thetas[i]), float(self.phis[j])

    def rows(self):
        """Yield ``(theta, phi, W)`` triples in row-major order."""
        for i, t in enumerate(self.thetas):
            for j, p in enumerate(self.phis):
                yield float(t), float(p), float(self.values[i, j])


def wigner_function(state: StateVector, theta_points: int = MIN_THETA_POINTS, phi_points: int = MIN_PHI_POINTS) -> WignerGrid:
    """Evaluate ``W`` on a Gauss-Legendre by uniform grid."""
    if theta_points < MIN_THETA_POINTS or phi_points < MIN_PHI_POINTS:
        raise ValueError(f"resolution must be at least {MIN_THETA_POINTS} x {MIN_PHI_POINTS}")
    x, w = roots_legendre(theta_points)
    thetas = np.arccos(x[::-1])
    weights = w[::-1]
    phis = 2 * math.pi * np.arange(phi_points) / phi_points
    values = wigner_at(state, thetas[:, None], phis[None, :])
    return WignerGrid(thetas, phis, values, weights)


def _circle(axis: Axis, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Angles of ``n`` points on the great circle perpendicular to ``axis``."""
    s = 2 * math.pi * np.arange(n) / n
    a, b = {Axis.X: ([0, 1, 0], [0, 0, 1]), Axis.Y: ([0, 0, 1], [1, 0, 0]), Axis.Z: ([1, 0, 0], [0, 1, 0])}[axis]
    pts = np.cos(s)[:, None] * np.array(a) + np.sin(s)[:, None] * np.array(b)
    theta = np.arccos(np.clip(pts[:, 2], -1, 1))
    phi = np.arctan2(pts[:, 1], pts[:, 0]) % (2 * math.pi)
    return theta, phi


def great_circle_values(state: StateVector, axis: Axis | str = Axis.Y, samples: int = 2048) -> np.ndarray:
    """``W`` sampled around the great circle perpendicular to ``axis``."""
    theta, phi = _circle(Axis.coerce(axis), samples)
    return wigner_at(state, theta, phi)


def fringe_count(state: StateVector, axis: Axis | str = Axis.Y, samples: int = 2048) -> int:
    """Number of positive interference fringes around the circle perpendicular to ``axis``.

    A fringe is a maximal run of samples with ``W > 0`` bounded by negative
    values; the count is periodic in the circle.
    """
    w = great_circle_values(state, axis, samples)
    scale = np.max(np.abs(w))
    positive = w > 1e-9 * scale
    if positive.all() or not positive.any():
        return 0
    return int(np.sum(positive & ~np.roll(positive, 1)))
