"""Collective spin operators, Dicke and Kitten states, and basis rotations.

All states are stored as dense complex vectors indexed by the magnetic
quantum number in ascending order: index ``i`` holds ``m = i - S``.  Every
vector carries the axis whose eigenbasis it is expressed in.

Basis conventions
-----------------
The z eigenbasis is the storage basis.  The x and y eigenbases are defined by

    |S, m>_x = (-1)^S exp(-i pi/2 S_y) |S, m>_z
    |S, m>_y =        exp(+i pi/2 S_x) |S, m>_z

The first rotation carries the z axis onto x, the second carries z onto y.
The global sign ``(-1)^S`` (integer S only; 1 otherwise) makes the y-basis
amplitudes of ``|S, 0>_x`` equal to the real column ``d^S_{m,0}(-pi/2)``
returned by :func:`wigner_d_m0`, without any extra phase.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from math import lgamma, log

import numpy as np

__all__ = [
    "Axis",
    "Parity",
    "Spin",
    "HalfIntegerSpinError",
    "StateVector",
    "CollectiveOperators",
    "WignerDColumn",
    "KittenSpec",
    "build_operators",
    "basis_unitary",
    "rotation_y",
    "wigner_d_m0",
    "wigner_d_column",
    "rotate_state",
    "dicke_state",
    "kitten_state",
    "overlap",
]

LOG2 = log(2.0)


class Axis(str, Enum):
    X = "x"
    Y = "y"
    Z = "z"

    @classmethod
    def coerce(cls, value: "Axis | str") -> "Axis":
        return value if isinstance(value, cls) else cls(str(value).lower())


class Parity(str, Enum):
    PLUS = "plus"
    MINUS = "minus"

    @classmethod
    def coerce(cls, value: "Parity | str") -> "Parity":
        if isinstance(value, cls):
            return value
        text = str(value).lower()
        aliases = {"+": "plus", "-": "minus", "even": "plus", "odd": "minus"}
        return cls(aliases.get(text, text))

    @property
    def sign(self) -> int:
        return 1 if self is Parity.PLUS else -1

    def flipped(self) -> "Parity":
        return Parity.MINUS if self is Parity.PLUS else Parity.PLUS


class HalfIntegerSpinError(ValueError):
    """Raised when an integer-spin-only quantity is requested for half-integer S."""


@dataclass(frozen=True)
class Spin:
    """Total spin, stored doubled so half-integers are exact.

    >>> Spin(3).S
    1.5
    """

    two_s: int

    def __post_init__(self):
        if isinstance(self.two_s, bool) or int(self.two_s) != self.two_s or self.two_s < 0:
            raise ValueError(f"two_s must be a non-negative integer, got {self.two_s!r}")
        object.__setattr__(self, "two_s", int(self.two_s))

    @classmethod
    def of(cls, s: float | int | "Spin") -> "Spin":
        """Build from the spin value itself, e.g. ``Spin.of(10)`` or ``Spin.of(2.5)``."""
        if isinstance(s, Spin):
            return s
        doubled = 2 * float(s)
        if abs(doubled - round(doubled)) > 1e-12:
            raise ValueError(f"spin must be a multiple of 1/2, got {s!r}")
        return cls(int(round(doubled)))

    @property
    def S(self) -> float:
        return self.two_s / 2

    @property
    def dim(self) -> int:
        return self.two_s + 1

    @property
    def is_integer(self) -> bool:
        return self.two_s % 2 == 0

    @property
    def int_s(self) -> int:
        if not self.is_integer:
            raise HalfIntegerSpinError(f"S = {self.S} is not an integer")
        return self.two_s // 2

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.dim) - self.S

    def index(self, m: float) -> int:
        i = m + self.S
        if abs(i - round(i)) > 1e-9 or not 0 <= round(i) < self.dim:
            raise ValueError(f"m = {m} is not a valid projection for S = {self.S}")
        return int(round(i))


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state of a single collective spin, expressed in one axis eigenbasis."""

    spin: Spin
    basis: Axis
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (self.spin.dim,):
            raise ValueError(f"expected {self.spin.dim} amplitudes, got {amps.shape[0]}")
        object.__setattr__(self, "basis", Axis.coerce(self.basis))
        object.__setattr__(self, "amplitudes", _readonly(amps))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.spin, self.basis, self.amplitudes / n)

    def to(self, basis: Axis | str) -> "StateVector":
        return rotate_state(self, basis)

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def amplitude(self, m: float) -> complex:
        return complex(self.amplitudes[self.spin.index(m)])

    def dm(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True, eq=False)
class CollectiveOperators:
    """``S_x, S_y, S_z, S_+, S_-`` written in the eigenbasis of ``basis``."""

    spin: Spin
    basis: Axis
    sx: np.ndarray = field(repr=False)
    sy: np.ndarray = field(repr=False)
    sz: np.ndarray = field(repr=False)
    sp: np.ndarray = field(repr=False)
    sm: np.ndarray = field(repr=False)

    def casimir(self) -> np.ndarray:
        return self.sx @ self.sx + self.sy @ self.sy + self.sz @ self.sz

    def along(self, n) -> np.ndarray:
        """``n . S`` for a 3-vector ``n``."""
        nx, ny, nz = n
        return nx * self.sx + ny * self.sy + nz * self.sz

    def __getitem__(self, name: str) -> np.ndarray:
        return getattr(self, {"x": "sx", "y": "sy", "z": "sz", "+": "sp", "-": "sm"}.get(name, name))


@lru_cache(maxsize=64)
def _z_operators(two_s: int):
    spin = Spin(two_s)
    m = spin.m_values
    S = spin.S
    # <m+1|S_+|m> sits one row below the diagonal in ascending-m order
    ladder = np.sqrt(S * (S + 1) - m[:-1] * (m[:-1] + 1))
    sp = np.diag(ladder, k=-1).astype(complex)
    sm = sp.T.copy()
    sx = 0.5 * (sp + sm)
    sy = -0.5j * (sp - sm)
    sz = np.diag(m).astype(complex)
    return tuple(_readonly(a) for a in (sx, sy, sz, sp, sm))


@lru_cache(maxsize=64)
def _sy_eigh(two_s: int):
    sy = _z_operators(two_s)[1]
    w, v = np.linalg.eigh(sy)
    return w, v


@lru_cache(maxsize=64)
def _sx_eigh(two_s: int):
    sx = _z_operators(two_s)[0]
    w, v = np.linalg.eigh(sx)
    return w, v


def _exp_hermitian(eig, angle: float) -> np.ndarray:
    w, v = eig
    return (v * np.exp(-1j * angle * w)) @ v.conj().T


def rotation_y(spin: Spin, beta: float) -> np.ndarray:
    """``exp(-i beta S_y)`` in the z basis (spectral evaluation)."""
    return _exp_hermitian(_sy_eigh(spin.two_s), beta)


def _x_phase(spin: Spin) -> float:
    if not spin.is_integer:
        return 1.0
    return -1.0 if spin.int_s % 2 else 1.0


@lru_cache(maxsize=64)
def _basis_unitary(two_s: int, axis: Axis) -> np.ndarray:
    spin = Spin(two_s)
    if axis is Axis.Z:
        u = np.eye(spin.dim, dtype=complex)
    elif axis is Axis.X:
        u = _x_phase(spin) * _exp_hermitian(_sy_eigh(two_s), np.pi / 2)
    else:
        u = _exp_hermitian(_sx_eigh(two_s), -np.pi / 2)
    return _readonly(u)


def basis_unitary(spin: Spin, axis: Axis | str) -> np.ndarray:
    """Columns are the ``axis`` eigenvectors ``|S, m>_axis`` written in the z basis."""
    return _basis_unitary(spin.two_s, Axis.coerce(axis))


def build_operators(spin: Spin, basis: Axis | str = Axis.Z) -> CollectiveOperators:
    """Collective spin matrices in the eigenbasis of ``basis``.

    Ladder elements are ``sqrt(S(S+1) - m(m +/- 1))`` in the z basis; other bases
    are obtained by the fixed basis unitaries (see module docstring).
    """
    basis = Axis.coerce(basis)
    ops = _z_operators(spin.two_s)
    if basis is not Axis.Z:
        u = basis_unitary(spin, basis)
        ops = tuple(u.conj().T @ op @ u for op in ops)
    return CollectiveOperators(spin, basis, *ops)


@dataclass(frozen=True, eq=False)
class WignerDColumn:
    """Real column ``d^S_{m,0}(-pi/2)`` for ``m = -S..S`` (ascending)."""

    spin: Spin
    values: np.ndarray = field(repr=False)

    @property
    def parity(self) -> str:
        """Which ``m`` carry weight: ``'even'`` for even S, ``'odd'`` for odd S."""
        return "even" if self.spin.int_s % 2 == 0 else "odd"

    def __getitem__(self, m: int) -> float:
        return float(self.values[self.spin.index(m)])

    def populations(self) -> np.ndarray:
        return self.values**2


def _log_abs_d_m0(S: int, m: int) -> float:
    # |d^S_{m,0}(pi/2)|^2 = C(S+m, (S+m)/2) C(S-m, (S-m)/2) / 2^(2S)
    a = (S + m) // 2
    c = (S - m) // 2
    return 0.5 * (lgamma(S + m + 1) + lgamma(S - m + 1)) - S * LOG2 - lgamma(a + 1) - lgamma(c + 1)


def wigner_d_m0(spin: Spin) -> WignerDColumn:
    """Closed-form ``d^S_{m,0}(-pi/2)`` evaluated through log-Gamma.

    Stable for S in the thousands.  Entries with ``S + m`` odd are exactly zero.

    Raises
    ------
    HalfIntegerSpinError
        For half-integer S, where ``|S, 0>`` does not exist; use
        :func:`wigner_d_column` with ``m_prime = +/-1/2`` instead.
    """
    if not spin.is_integer:
        raise HalfIntegerSpinError(
            f"|S,0> does not exist for half-integer S = {spin.S}; use wigner_d_column(spin, 0.5)"
        )
    S = spin.int_s
    values = np.zeros(spin.dim)
    for m in range(S % 2, S + 1, 2):
        # (-1)^m from beta -> -beta, (-1)^((S+m)/2) from P_S^m(0)
        sign = -1.0 if (m + (S + m) // 2) % 2 else 1.0
        mag = np.exp(_log_abs_d_m0(S, m))
        values[S + m] = sign * mag
        values[S - m] = (-1.0) ** S * sign * mag
    return WignerDColumn(spin, _readonly(values))


def wigner_d_column(spin: Spin, m_prime: float, beta: float = -np.pi / 2) -> np.ndarray:
    """Column ``d^S_{m,m'}(beta)`` from the matrix exponential; works for any S."""
    d = rotation_y(spin, beta)
    return d[:, spin.index(m_prime)].real.copy()


def rotate_state(state: StateVector, target: Axis | str) -> StateVector:
    """Re-express ``state`` in the eigenbasis of ``target``; norm is preserved."""
    target = Axis.coerce(target)
    if target is state.basis:
        return state
    u_src = basis_unitary(state.spin, state.basis)
    u_dst = basis_unitary(state.spin, target)
    amps = u_dst.conj().T @ (u_src @ state.amplitudes)
    return StateVector(state.spin, target, amps)


def dicke_state(spin: Spin, m: float, basis: Axis | str = Axis.Z) -> StateVector:
    amps = np.zeros(spin.dim, dtype=complex)
    amps[spin.index(m)] = 1.0
    return StateVector(spin, basis, amps)


@dataclass(frozen=True)
class KittenSpec:
    """``(|S,m>_y +/- (-1)^S |S,-m>_y)/sqrt(2)``; ``m = 0`` degenerates to ``|S,0>_y``."""

    spin: Spin
    m: int
    parity: Parity = Parity.PLUS

    def __post_init__(self):
        object.__setattr__(self, "parity", Parity.coerce(self.parity))
        if not self.spin.is_integer:
            raise HalfIntegerSpinError("Kitten states are defined here for integer S")
        if int(self.m) != self.m or self.m < 0:
            raise ValueError(f"m must be a non-negative integer, got {self.m!r}")
        if self.m > self.spin.int_s:
            raise ValueError(f"m = {self.m} exceeds S = {self.spin.int_s}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def degenerate(self) -> bool:
        return self.m == 0

    @property
    def S(self) -> int:
        return self.spin.int_s


def kitten_state(spec: KittenSpec) -> StateVector:
    """Kitten state in the y basis."""
    spin = spec.spin
    amps = np.zeros(spin.dim, dtype=complex)
    if spec.degenerate:
        amps[spin.index(0)] = 1.0
    else:
        amps[spin.index(spec.m)] = 1 / np.sqrt(2)
        amps[spin.index(-spec.m)] = spec.parity.sign * (-1) ** spec.S / np.sqrt(2)
    return StateVector(spin, Axis.Y, amps)


def overlap(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``; ``b`` is rotated into ``a``'s basis when they differ."""
    if a.spin != b.spin:
        raise ValueError(f"spin mismatch: {a.spin.S} vs {b.spin.S}")
    b = rotate_state(b, a.basis)
    return complex(np.vdot(a.amplitudes, b.amplitudes))
