"""Quantum Fisher information and cycle-probability analytics.

For a pure state the QFI with respect to a generator ``G`` is ``4 Var(G)``.
For generators ``n . S`` this is the quadratic form ``4 n^T C n`` of the
symmetrized covariance matrix ``C`` of ``(S_x, S_y, S_z)``, so the optimal
direction is the top eigenvector of ``C``.  :func:`qfi_scan` also runs an
explicit sphere search as an independent check.

The probability analytics concern the distribution ``2 d_{m,0}^2`` over
entangled-state cycles reached from ``|S, 0>_x`` and the cumulative weight
``P_crit`` of the cycles whose QFI ``4 m^2`` beats the initial ``2S(S+1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize
from scipy.special import gammaln

from .special import LOG2
from .spin import Axis, Spin, StateVector, build_operators, dicke_state, wigner_d_m0

__all__ = [
    "GeneratorDirection",
    "QfiScan",
    "qfi",
    "covariance_matrix",
    "optimal_qfi",
    "qfi_scan",
    "m_crit",
    "m_crit_ceiling",
    "p_cat",
    "p_crit",
    "alpha_r",
    "alpha_r_from_column",
    "alpha_r_lower_bound",
    "contributing_terms",
    "segment_start",
    "segment_index",
    "p_crit_piecewise",
    "p_crit_limit",
]


@dataclass(frozen=True)
class GeneratorDirection:
    """Unit vector ``(sin t cos p, sin t sin p, cos t)`` selecting ``G = n . S``."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0 <= self.theta <= math.pi:
            raise ValueError("theta must lie in [0, pi]")

    @classmethod
    def from_vector(cls, n) -> "GeneratorDirection":
        n = np.asarray(n, dtype=float)
        n = n / np.linalg.norm(n)
        theta = math.atan2(math.hypot(n[0], n[1]), n[2])
        phi = math.atan2(n[1], n[0]) % (2 * math.pi)
        return cls(theta, phi)

    @classmethod
    def axis(cls, name: str) -> "GeneratorDirection":
        return {"x": cls(math.pi / 2, 0.0), "y": cls(math.pi / 2, math.pi / 2), "z": cls(0.0, 0.0)}[name]

    @property
    def vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])


def covariance_matrix(state: StateVector) -> np.ndarray:
    """Symmetrized covariance ``Re<S_i S_j> - <S_i><S_j>`` of the collective spin."""
    ops = build_operators(state.spin, state.basis)
    psi = state.normalized().amplitudes
    vecs = [op @ psi for op in (ops.sx, ops.sy, ops.sz)]
    mean = np.array([np.vdot(psi, v).real for v in vecs])
    second = np.array([[np.vdot(a, b).real for b in vecs] for a in vecs])
    return second - np.outer(mean, mean)


def qfi(state: StateVector, g: GeneratorDirection | str) -> float:
    """``4 Var(n . S)`` for a pure state."""
    if isinstance(g, str):
        g = GeneratorDirection.axis(g)
    n = g.vector
    ops = build_operators(state.spin, state.basis)
    psi = state.normalized().amplitudes
    gpsi = ops.along(n) @ psi
    mean = np.vdot(psi, gpsi).real
    return float(max(4 * (np.vdot(gpsi, gpsi).real - mean**2), 0.0))


def optimal_qfi(state: StateVector) -> tuple[GeneratorDirection, float]:
    """Largest QFI over all generator directions, from the top eigenpair of the covariance."""
    w, v = np.linalg.eigh(covariance_matrix(state))
    n = v[:, -1]
    if n[2] < 0 or (n[2] == 0 and n[np.argmax(np.abs(n))] < 0):
        n = -n
    return GeneratorDirection.from_vector(n), float(4 * w[-1])


@dataclass(frozen=True, eq=False)
class QfiScan:
    state: StateVector = field(repr=False)
    thetas: np.ndarray = field(repr=False)
    phis: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    optimum: tuple
    spectral: tuple

    @property
    def grid(self) -> list[GeneratorDirection]:
        return [GeneratorDirection(t, p) for t in self.thetas for p in self.phis]

    def axis_values(self) -> dict:
        return {a: qfi(self.state, a) for a in "xyz"}


def qfi_scan(state: StateVector, grid_resolution: int = 16) -> QfiScan:
    """Grid scan of the QFI over the sphere with local refinement of the best point.

    The refinement alternates bounded line searches (golden-section with
    parabolic steps) in ``theta`` and ``phi`` until the value stops improving.  The spectral optimum from
    :func:`optimal_qfi` is stored alongside for comparison.
    """
    if grid_resolution < 8:
        raise ValueError("grid_resolution must be at least 8")
    cov = covariance_matrix(state)

    def value(theta, phi):
        n = _unit(theta, phi)
        return 4 * float(n @ cov @ n)

    thetas = np.linspace(0.0, math.pi, grid_resolution)
    phis = np.linspace(0.0, 2 * math.pi, 2 * grid_resolution, endpoint=False)
    values = np.array([[value(t, p) for p in phis] for t in thetas])
    i, j = np.unravel_index(np.argmax(values), values.shape)
    theta, phi = float(thetas[i]), float(phis[j])
    dt, dp = math.pi / (grid_resolution - 1), math.pi / grid_resolution
    best = value(theta, phi)
    for _ in range(100):
        res = optimize.minimize_scalar(
            lambda t: -value(t, phi), bounds=(theta - dt, theta + dt), method="bounded", options={"xatol": 1e-12}
        )
        if -res.fun > value(theta, phi):
            theta = float(res.x)
        res = optimize.minimize_scalar(
            lambda p: -value(theta, p), bounds=(phi - dp, phi + dp), method="bounded", options={"xatol": 1e-12}
        )
        if -res.fun > value(theta, phi):
            phi = float(res.x)
        new = value(theta, phi)
        dt, dp = max(dt / 4, 1e-6), max(dp / 4, 1e-6)
        if new - best <= 1e-14 * max(abs(new), 1.0):
            best = max(best, new)
            break
        best = new
    # fold the refined angles back into the canonical ranges
    direction = GeneratorDirection.from_vector(_unit(theta, phi))
    return QfiScan(state, thetas, phis, values, (direction, best), optimal_qfi(state))


def _unit(theta, phi):
    st = math.sin(theta)
    return np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])


# -- cycle probabilities --------------------------------------------------------


def _require_integer(spin: Spin) -> int:
    if not spin.is_integer:
        raise ValueError("integer spin required")
    return spin.int_s


def m_crit(spin: Spin, initial_m: int = 0) -> float:
    """``sqrt((S(S+1) - m0^2)/2)``: cycles above it beat the initial state's QFI."""
    S = spin.S
    if not 0 <= initial_m <= S:
        raise ValueError("initial_m must lie in [0, S]")
    return math.sqrt((S * (S + 1) - initial_m**2) / 2)


def m_crit_ceiling(spin: Spin, initial_m: int = 0) -> int:
    """``ceil(m_crit)`` in exact integer arithmetic (an integer ``m_crit`` counts as reached)."""
    S = _require_integer(spin)
    if not 0 <= initial_m <= S:
        raise ValueError("initial_m must lie in [0, S]")
    num = S * (S + 1) - initial_m**2  # m_crit^2 = num / 2
    c = math.isqrt(num // 2)
    while 2 * c * c < num:
        c += 1
    while c > 0 and 2 * (c - 1) ** 2 >= num:
        c -= 1
    return c


def p_cat(spin: Spin) -> tuple[float, float]:
    """Probability of the ``m = S`` cycle, ``2 (2S)! / (2^{2S} (S!)^2)``, and its Stirling form ``2/sqrt(pi S)``."""
    S = _require_integer(spin)
    if S < 1:
        raise ValueError("S must be at least 1")
    log_exact = LOG2 + gammaln(2 * S + 1) - 2 * S * LOG2 - 2 * gammaln(S + 1)
    return float(math.exp(log_exact)), 2 / math.sqrt(math.pi * S)


def _cycle_probabilities(spin: Spin, initial_m: int) -> dict:
    S = spin.int_s
    if initial_m == 0:
        d2 = wigner_d_m0(spin).populations()
    else:
        d2 = dicke_state(spin, initial_m, Axis.X).to(Axis.Y).populations()
    return {m: d2[S + m] + (d2[S - m] if m else 0.0) for m in range(S + 1)}


def p_crit(spin: Spin, initial_m: int = 0) -> float:
    """Total probability of the cycles with ``m >= ceil(m_crit)``."""
    S = _require_integer(spin)
    if S < 1:
        raise ValueError("S must be at least 1")
    probs = _cycle_probabilities(spin, initial_m)
    lo = m_crit_ceiling(spin, initial_m)
    return float(sum(probs[m] for m in range(lo, S + 1)))


def contributing_terms(spin: Spin) -> int:
    """Number of populated cycles above threshold beyond the Cat, ``floor((S - ceil(m_crit))/2)``."""
    S = _require_integer(spin)
    return (S - m_crit_ceiling(spin)) // 2


def _log_abs_ratio_sq(S: int, b: int) -> float:
    # [sqrt(G(2b+1)) G(1/2-S) sqrt(G(2S+1)) / (sqrt(G(2S-2b+1)) G(b+1) G(1/2+b-S) 2^{2b})]^2
    return (
        gammaln(2 * b + 1)
        + 2 * gammaln(0.5 - S)
        + gammaln(2 * S + 1)
        - gammaln(2 * S - 2 * b + 1)
        - 2 * gammaln(b + 1)
        - 2 * gammaln(0.5 + b - S)
        - 4 * b * LOG2
    )


def _alpha_integrand(b, S):
    return math.sqrt(S / (math.pi * b * (S - b))) * (1 + 1 / (24 * b)) / (1 + 1 / (12 * b)) ** 2


def alpha_r(spin: Spin, r: int) -> tuple[float, float]:
    """``sum_{b=0}^{r} (d_{S-2b,0} / d_{S,0})^2``, exact (log-Gamma) and Stirling forms.

    The Stirling form is for plots and documentation; computations that need
    accuracy use the exact value.
    """
    S = _require_integer(spin)
    if not 0 <= r or S - 2 * r < 0:
        raise ValueError("r must satisfy 0 <= r <= S/2")
    # the b = 0 term is a ratio of an element to itself
    exact = 1.0 + math.fsum(math.exp(_log_abs_ratio_sq(S, b)) for b in range(1, r + 1))
    stirling = 1.0 + math.fsum(_alpha_integrand(b, S) for b in range(1, r + 1))
    return exact, stirling


def alpha_r_from_column(spin: Spin, r: int) -> float:
    """The same ratio sum read directly off :func:`wigner_d_m0`."""
    S = _require_integer(spin)
    if not 0 <= r or S - 2 * r < 0:
        raise ValueError("r must satisfy 0 <= r <= S/2")
    d = wigner_d_m0(spin)
    return 1.0 + math.fsum((d[S - 2 * b] / d[S]) ** 2 for b in range(1, r + 1))


def alpha_r_lower_bound(spin: Spin, r: int) -> float:
    """``1 + integral_1^{r+1}`` of the Stirling summand, by adaptive quadrature."""
    S = _require_integer(spin)
    if not 0 <= r or S - 2 * r < 0:
        raise ValueError("r must satisfy 0 <= r <= S/2")
    if r == 0:
        return 1.0
    upper = r + 1
    # the summand has an integrable 1/sqrt singularity at b = S
    weight = dict(weight="alg", wvar=(0.0, -0.5)) if upper >= S else {}
    if weight:
        val, _ = integrate.quad(
            lambda b: math.sqrt(S / (math.pi * b)) * (1 + 1 / (24 * b)) / (1 + 1 / (12 * b)) ** 2,
            1.0,
            float(S),
            **weight,
            epsabs=1e-13,
            epsrel=1e-12,
        )
    else:
        val, _ = integrate.quad(_alpha_integrand, 1.0, float(upper), args=(S,), epsabs=1e-13, epsrel=1e-12, limit=200)
    return 1.0 + val


def segment_start(r: int) -> float:
    """Spin at which the ``r``-th extra cycle enters: ``1 + 2 sqrt2/(sqrt2 - 1) r`` (about ``1 + 7r``)."""
    return 1 + 2 * math.sqrt(2) / (math.sqrt(2) - 1) * r


def segment_index(spin: Spin) -> int:
    """Index ``r`` of the segment ``[S_r, S_{r+1})`` containing ``S`` under :func:`segment_start`."""
    S = _require_integer(spin)
    return max(int(math.floor((S - 1) * (math.sqrt(2) - 1) / (2 * math.sqrt(2)))), 0)


def p_crit_piecewise(spin: Spin, segments: str = "exact") -> float:
    """``2 alpha_r / sqrt(pi S)`` with ``r`` the number of contributing extra cycles.

    ``segments="exact"`` takes ``r`` from :func:`contributing_terms`;
    ``segments="linear"`` uses the asymptotic segment boundaries of
    :func:`segment_start`.
    """
    S = _require_integer(spin)
    if segments == "exact":
        r = contributing_terms(spin)
    elif segments == "linear":
        r = segment_index(spin)
    else:
        raise ValueError(f"unknown segments mode {segments!r}")
    r = min(r, S // 2)
    return 2 * alpha_r(spin, r)[0] / math.sqrt(math.pi * S)


def p_crit_limit(f: float) -> float:
    """Large-spin probability of beating a QFI of ``f S^2``: ``(4/pi) arctan sqrt((2 - sqrt f)/(2 + sqrt f))``."""
    if not 0 <= f <= 4:
        raise ValueError("f must lie in [0, 4]")
    rf = math.sqrt(f)
    return 4 / math.pi * math.atan(math.sqrt((2 - rf) / (2 + rf)))
