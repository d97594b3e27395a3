"""Secret-sharing observables and white-noise robustness of Kitten states.

Here a spin-``S`` state is viewed as ``N = 2S`` qubits.  Each qubit uses the
``sigma_y`` eigenbasis ``|1>_y = (|0> + i|1>)/sqrt(2)``, ``|0>_y = (|0> - i|1>)/sqrt(2)``
written in the computational (``sigma_z``) basis, and qubit 0 (Alice) is the
most significant bit.  In that picture a Kitten state is a signed pair of
permutation sums::

    (sum |1^{S+m} 0^{S-m}>_y  +/-  sum |1^{S-m} 0^{S+m}>_y) / sqrt(2 C(2S, S-m))

The sign in this expansion (the *qubit sign*) differs from the collective
label of :class:`~spincats.spin.KittenSpec` by ``(-1)^(S+m)``; see
:func:`qubit_sign`.  The z-parity ``<sigma_z^{(x)N}>`` equals the qubit sign
and the x-parity equals ``(-1)^m`` times it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext

import numpy as np
from scipy import optimize

from .special import LOG2
from .spin import Axis, KittenSpec, Parity, Spin, kitten_state

__all__ = [
    "MAX_QUBITS",
    "NoisyKitten",
    "AttackParams",
    "EavesdropState",
    "ReconstructionResult",
    "CriticalRatio",
    "qubit_sign",
    "spec_from_qubit_sign",
    "qubit_kitten",
    "qubit_kitten_y",
    "parity_expectation",
    "parity_expectation_brute_force",
    "parity_expectation_collective",
    "xi_states",
    "eavesdrop_state",
    "simulate_reconstruction",
    "p_crit_kitten",
    "p_crit_ghz",
    "critical_ratio_scan",
    "reduced_two_party_weight",
    "violates_local_realism",
]

MAX_QUBITS = 24
_LOCAL_REALISM = 1 / math.sqrt(2)
_DECIMAL_PREC = 60

# columns: |0>_y, |1>_y in the computational basis
_Y_TO_Z = np.array([[1, 1], [-1j, 1j]]) / np.sqrt(2)
_HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def _n_qubits(spec: KittenSpec) -> int:
    n = 2 * spec.S
    if n > MAX_QUBITS:
        raise ValueError(f"{n} qubits exceeds the brute-force cap of {MAX_QUBITS}")
    return n


def _axis(axis) -> Axis:
    axis = Axis(axis)
    if axis not in (Axis.Z, Axis.X):
        raise ValueError(f"parity is defined for the z and x axes, got {axis.value!r}")
    return axis


def qubit_sign(spec: KittenSpec) -> int:
    """Sign between the two permutation sums of ``spec``'s qubit expansion.

    ``|S,m>_y`` of the collective representation is ``i^(S-m)`` times the
    normalized permutation sum with ``S+m`` ones, so the collective relative
    sign ``(-1)^S`` becomes ``(-1)^(S+m)`` relative to the qubit sums.
    """
    if spec.degenerate:
        return 1
    return spec.parity.sign * (-1) ** (spec.S + spec.m)


def spec_from_qubit_sign(spin: Spin | int, m: int, sign: int) -> KittenSpec:
    """The :class:`KittenSpec` whose qubit expansion carries ``sign``."""
    spin = spin if isinstance(spin, Spin) else Spin.of(spin)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if m == 0:
        if sign != 1:
            raise ValueError("the m = 0 sums coincide; only the + combination is a state")
        return KittenSpec(spin, 0)
    label = sign * (-1) ** (spin.int_s + m)
    return KittenSpec(spin, m, Parity.PLUS if label > 0 else Parity.MINUS)


def _popcounts(n: int) -> np.ndarray:
    idx = np.arange(2**n, dtype=np.int64)
    counts = np.zeros_like(idx)
    for k in range(n):
        counts += (idx >> k) & 1
    return counts


def qubit_kitten_y(spec: KittenSpec) -> np.ndarray:
    """Real amplitudes over y-product strings, bit 1 meaning ``|1>_y``.

    Each string of the two sums has weight
    ``1 / sqrt(2 C(2S, S-m))``, or ``1 / sqrt(C(2S, S))`` when ``m = 0``.
    """
    n = _n_qubits(spec)
    S, m = spec.S, spec.m
    ones = _popcounts(n)
    out = np.zeros(2**n)
    if spec.degenerate:
        out[ones == S] = 1 / math.sqrt(math.comb(n, S))
        return out
    norm = math.sqrt(2 * math.comb(n, S - m))
    out[ones == S + m] = 1 / norm
    out[ones == S - m] = qubit_sign(spec) / norm
    return out


def _apply_local(psi: np.ndarray, local: np.ndarray, n: int) -> np.ndarray:
    t = psi.reshape((2,) * n)
    for k in range(n):
        t = np.moveaxis(np.tensordot(local, t, axes=([1], [k])), 0, k)
    return t.reshape(-1)


def qubit_kitten(spec: KittenSpec) -> np.ndarray:
    """The ``2^(2S)`` computational-basis amplitudes of ``spec``."""
    n = _n_qubits(spec)
    return _apply_local(qubit_kitten_y(spec).astype(complex), _Y_TO_Z, n)


def parity_expectation_brute_force(spec: KittenSpec, axis: Axis | str) -> float:
    """``<sigma_a^{(x)2S}>`` from the explicit ``2^(2S)`` amplitude vector."""
    axis = _axis(axis)
    n = _n_qubits(spec)
    psi = qubit_kitten(spec)
    if axis is Axis.Z:
        signs = 1 - 2 * (_popcounts(n) & 1)
        return float(np.real(np.vdot(psi, signs * psi)))
    # sigma_x on every qubit flips every bit
    return float(np.real(np.vdot(psi, psi[::-1])))


def parity_expectation_collective(spec: KittenSpec, axis: Axis | str) -> float:
    """Same quantity via ``sigma_a^{(x)N} = (-1)^(S - S_a)`` on the collective state."""
    axis = _axis(axis)
    pops = kitten_state(spec).to(axis).populations()
    m = spec.spin.m_values
    return float(np.sum(pops * (-1.0) ** (spec.S - m)))


def parity_expectation(spec: KittenSpec, axis: Axis | str) -> float:
    """Parity ``<sigma_a^{(x)2S}>`` for ``a`` in ``{z, x}``.

    Up to the brute-force cap both evaluations run and must agree; beyond it
    only the collective one is used.  Kitten states are parity eigenstates, so
    the result is ``+1`` or ``-1``.
    """
    collective = parity_expectation_collective(spec, axis)
    if 2 * spec.S <= MAX_QUBITS:
        brute = parity_expectation_brute_force(spec, axis)
        if abs(brute - collective) > 1e-9:
            raise ArithmeticError(f"parity evaluations disagree: {brute} vs {collective}")
    return collective


@dataclass(frozen=True)
class ReconstructionResult:
    """Measurement records and Alice's reconstructed outcomes.

    ``records[i, k]`` is the ``+/-1`` result of qubit ``k`` (Alice is ``k = 0``)
    in record ``i``.
    """

    axis: Axis
    parity: int
    records: np.ndarray
    reconstructed: np.ndarray

    @property
    def successes(self) -> int:
        return int(np.sum(self.reconstructed == self.records[:, 0]))

    @property
    def all_succeeded(self) -> bool:
        return self.successes == len(self.records)


def simulate_reconstruction(
    spec: KittenSpec,
    axis: Axis | str,
    n_records: int,
    rng: np.random.Generator | int | None = None,
    parity: int | None = None,
) -> ReconstructionResult:
    """Sample joint measurements and let the Bobs infer Alice's result.

    Every party measures ``sigma_a``; the Bobs combine their outcomes with the
    known parity ``P`` as ``R_A = P / (R_B1 ... R_B(N-1))``.  ``parity`` is
    the value the parties believe in; it defaults to the true parity.
    """
    axis = _axis(axis)
    n = _n_qubits(spec)
    rng = np.random.default_rng(rng)
    if parity is None:
        parity = int(round(parity_expectation(spec, axis)))
    psi = qubit_kitten(spec)
    if axis is Axis.X:
        psi = _apply_local(psi, _HADAMARD, n)
    probs = np.abs(psi) ** 2
    draws = rng.choice(probs.size, size=n_records, p=probs / probs.sum())
    shifts = np.arange(n - 1, -1, -1)
    bits = (draws[:, None] >> shifts[None, :]) & 1
    records = (1 - 2 * bits).astype(np.int8)
    reconstructed = (parity * np.prod(records[:, 1:], axis=1)).astype(np.int8)
    return ReconstructionResult(axis, parity, records, reconstructed)


def xi_states(spec: KittenSpec) -> tuple[np.ndarray, np.ndarray]:
    """Bob-register states ``(xi, xi_bar)`` given Alice in ``|0>_y`` / ``|1>_y``.

    Built directly from the permutation sums on ``2S - 1`` qubits, each
    normalized by ``sqrt(C(2S, S-m))`` so that both have unit norm and
    ``chi = (|0>_A |xi> + |1>_A |xi_bar>) / sqrt(2)``.
    """
    n = _n_qubits(spec) - 1
    S, m = spec.S, spec.m
    ones = _popcounts(n)
    sign = qubit_sign(spec)
    xi = np.zeros(2**n)
    xi_bar = np.zeros(2**n)
    if spec.degenerate:
        norm = math.sqrt(math.comb(2 * S, S) / 2)
        xi[ones == S] = 1 / norm
        xi_bar[ones == S - 1] = 1 / norm
        return xi, xi_bar
    norm = math.sqrt(math.comb(2 * S, S - m))
    xi[ones == S + m] = 1 / norm
    xi[ones == S - m] += sign / norm
    xi_bar[ones == S + m - 1] = 1 / norm
    xi_bar[ones == S - m - 1] += sign / norm
    return xi, xi_bar


@dataclass(frozen=True)
class AttackParams:
    """Attack strength ``phi`` in ``[0, pi/2)``."""

    phi: float

    def __post_init__(self):
        if not 0 <= self.phi < math.pi / 2:
            raise ValueError(f"phi must lie in [0, pi/2), got {self.phi!r}")


@dataclass(frozen=True)
class EavesdropState:
    """Alice, Bob register and Evan's qubit after the coherent attack.

    ``amplitudes[a, b, e]`` uses y-product strings for Alice and Bob and the
    ancilla basis ``|0>_E, |1>_E`` for Evan.
    """

    spec: KittenSpec
    attack: AttackParams
    amplitudes: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def branch_weights(self) -> dict[str, float]:
        """Weights of the three branches, which sum to one."""
        xi, xi_bar = xi_states(self.spec)
        a = self.amplitudes
        return {
            "alice0_xi_evan0": float(abs(np.vdot(xi, a[0, :, 0])) ** 2),
            "alice1_xibar_evan0": float(abs(np.vdot(xi_bar, a[1, :, 0])) ** 2),
            "alice1_xi_evan1": float(abs(np.vdot(xi, a[1, :, 1])) ** 2),
        }

    @property
    def secure(self) -> bool:
        """Whether the Alice-Bob branch still outweighs the Alice-Evan one."""
        return math.cos(self.attack.phi) > math.sin(self.attack.phi)


def eavesdrop_state(spec: KittenSpec, attack: AttackParams) -> EavesdropState:
    """Apply ``U_BE`` (``xi -> xi``, ``xi_bar -> cos xi_bar + sin xi |1>_E``)."""
    xi, xi_bar = xi_states(spec)
    c, s = math.cos(attack.phi), math.sin(attack.phi)
    amps = np.zeros((2, xi.size, 2))
    amps[0, :, 0] = xi / math.sqrt(2)
    amps[1, :, 0] = c * xi_bar / math.sqrt(2)
    amps[1, :, 1] = s * xi / math.sqrt(2)
    return EavesdropState(spec, attack, amps)


@dataclass(frozen=True)
class NoisyKitten:
    """``p |chi><chi| + (1 - p) I / 2^(2S)`` on ``2S`` qubits."""

    spec: KittenSpec
    p: float

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ValueError(f"p must lie in [0, 1], got {self.p!r}")


def _decimal_sqrt2() -> Decimal:
    return Decimal(2).sqrt()


def p_crit_kitten(spin: Spin | int, m: int) -> float:
    """White-noise threshold ``C / (C + (sqrt(2) - 1) 2^(2S-2))`` with ``C = C(2S, S-m)``.

    Evaluated in exact integers and 60-digit decimals, then rounded once.
    """
    spin = spin if isinstance(spin, Spin) else Spin.of(spin)
    S = spin.int_s
    if not 0 <= m <= S:
        raise ValueError(f"m must lie in [0, {S}], got {m}")
    c = math.comb(2 * S, S - m)
    with localcontext() as ctx:
        ctx.prec = _DECIMAL_PREC
        scale = Decimal(2) ** (2 * S - 2) if S >= 1 else Decimal(1) / 4
        return float(Decimal(c) / (Decimal(c) + (_decimal_sqrt2() - 1) * scale))


def p_crit_ghz(spin: Spin | int | float) -> float:
    """GHZ threshold ``2^((1 - 2S)/2)``."""
    spin = spin if isinstance(spin, Spin) else Spin.of(spin)
    if spin.two_s < 1:
        raise ValueError("need S >= 1/2")
    with localcontext() as ctx:
        ctx.prec = _DECIMAL_PREC
        return float(_decimal_sqrt2() ** (1 - spin.two_s))


def reduced_two_party_weight(noisy: NoisyKitten) -> float:
    """``|Psi+>`` fraction of the two parties left after the post-selected y measurements.

    Equal to ``1 / (1 + (1-p) C(2S, S-m) / (2^(2S-2) p))``; local realism is
    violated when it exceeds ``1/sqrt(2)``.
    """
    if noisy.p == 0:
        return 0.0
    S, m = noisy.spec.S, noisy.spec.m
    log_ratio = math.lgamma(2 * S + 1) - math.lgamma(S - m + 1) - math.lgamma(S + m + 1) - (2 * S - 2) * math.log(2)
    return 1 / (1 + (1 - noisy.p) / noisy.p * math.exp(log_ratio))


def violates_local_realism(noisy: NoisyKitten) -> bool:
    return reduced_two_party_weight(noisy) > _LOCAL_REALISM


@dataclass(frozen=True)
class CriticalRatio:
    """Where the Kitten threshold drops below the GHZ one for a given ``S``.

    ``m`` is the smallest ``m`` with ``p_crit_kitten(S, m) < p_crit_ghz(S)``;
    by monotonicity in ``m`` every larger ``m`` also qualifies.  ``None`` when
    no ``m`` does.
    """

    S: int
    m: int | None
    p_kitten: float | None
    p_ghz: float
    m_continuous: float | None = None

    @property
    def ratio(self) -> float | None:
        """``(S - m) / S``."""
        return None if self.m is None else (self.S - self.m) / self.S

    @property
    def ratio_per_qubit(self) -> float | None:
        """``(S - m) / 2S``."""
        return None if self.m is None else (self.S - self.m) / (2 * self.S)

    @property
    def ratio_continuous(self) -> float | None:
        """``(S - m) / S`` at the real-valued crossing, free of integer steps."""
        return None if self.m_continuous is None else (self.S - self.m_continuous) / self.S


def _log_threshold_gap(S: int, m: float) -> float:
    # log p_crit_kitten - log p_crit_ghz with the binomial continued in m
    log_c = math.lgamma(2 * S + 1) - math.lgamma(S - m + 1) - math.lgamma(S + m + 1)
    log_kitten = -np.logaddexp(0.0, math.log(math.sqrt(2) - 1) + (2 * S - 2) * LOG2 - log_c)
    return float(log_kitten - (0.5 - S) * LOG2)


def _continuous_crossing(S: int) -> float | None:
    lo, hi = _log_threshold_gap(S, 0.0), _log_threshold_gap(S, float(S))
    if not (lo > 0 > hi):
        return None
    return optimize.brentq(lambda m: _log_threshold_gap(S, m), 0.0, float(S), xtol=1e-13)


def _kitten_beats_ghz(S: int, m: int) -> bool:
    """Exact ``p_crit_kitten(S, m) < p_crit_ghz(S)`` in integer arithmetic.

    Clearing denominators turns the inequality into ``A + sqrt(2) B < 0`` with
    ``A = C 2^S - 2 Q`` and ``B = Q - C``, ``Q = 4^(S-1)``.
    """
    c = math.comb(2 * S, S - m)
    q = 4 ** (S - 1)
    a, b = c * 2**S - 2 * q, q - c
    if a <= 0 and b <= 0:
        return a < 0 or b < 0
    if a >= 0 and b >= 0:
        return False
    return a * a > 2 * b * b if a < 0 else 2 * b * b > a * a


def critical_ratio_scan(spins) -> list[CriticalRatio]:
    """One :class:`CriticalRatio` per integer spin in ``spins``."""
    rows = []
    for S in spins:
        spin = Spin.of(S)
        S = spin.int_s
        if S < 1:
            raise ValueError("need S >= 1")
        ghz = p_crit_ghz(spin)
        # p_crit_kitten falls with m, so bisect for the first m below ghz
        lo, hi = 0, S + 1
        while lo < hi:
            mid = (lo + hi) // 2
            if _kitten_beats_ghz(S, mid):
                hi = mid
            else:
                lo = mid + 1
        m = lo if lo <= S else None
        p_kitten = None if m is None else p_crit_kitten(spin, m)
        rows.append(CriticalRatio(S, m, p_kitten, ghz, _continuous_crossing(S)))
    return rows
