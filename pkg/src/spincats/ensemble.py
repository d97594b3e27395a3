"""Ensemble dynamics of ``N`` spin-1/2 particles under collective and local noise.

The master equation is::

    d rho/dt = Upsilon D[S_y] rho + gamma_eff sum_n (D'[s_z^(n)/2] + D'[s_+^(n)] + D'[s_-^(n)]) rho

with ``D[O] rho = 2 O rho O^+ - {O^+ O, rho}`` and the standard form
``D'[O] = D[O]/2`` for the single-particle terms, where ``s_a^(n)`` are Pauli
operators of particle ``n`` and ``s_+ = |up><down|``.

Permutation-symmetric states are block diagonal over total spin ``j``::

    rho = sum_j  rho_j (x) I_{d_j}

with ``d_j`` the number of copies of spin ``j``.  Only the ``rho_j`` are
stored.  Collective operators act inside each block.  For a single-particle
operator ``O`` the sandwich ``sum_n O_n rho O_n^+`` is evaluated on the last
particle after coupling the other ``N - 1`` to ``j1`` and projecting onto the
symmetric-group average, which connects ``j`` to ``j`` and ``j +/- 1``.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp

from .special import clebsch_gordan, dicke_multiplicity
from .spin import Axis, KittenSpec, Spin, StateVector, build_operators, dicke_state, kitten_state, wigner_d_m0

__all__ = [
    "DEFAULT_MAX_PARTICLES",
    "MARGIN_CAP",
    "StiffnessError",
    "BlockLayout",
    "PermInvariantState",
    "EnsembleConfig",
    "Liouvillian",
    "FidelityFits",
    "FitAssignment",
    "TimescaleCheck",
    "build_liouvillian",
    "evolve",
    "kitten_fidelity",
    "fidelity_fits",
    "assign_fits",
    "timescale_check",
]

DEFAULT_MAX_PARTICLES = 20
MARGIN_CAP = sys.float_info.max

_TRACE_TOL = 1e-8
_HERMITIAN_TOL = 1e-10
_POSITIVITY_TOL = 1e-8
_TRACE_DRIFT_TOL = 1e-9

# single-particle operators, index 0 = down (s = -1/2), 1 = up
_SIGMA_Z = np.diag([-1.0, 1.0]).astype(complex)
_SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)
_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, 1j], [-1j, 0]], dtype=complex),
    "z": _SIGMA_Z,
}
LOCAL_OPERATORS = {"dephasing": _SIGMA_Z / 2, "pumping": _SIGMA_PLUS, "decay": _SIGMA_PLUS.T.copy()}


class StiffnessError(RuntimeError):
    """The adaptive integrator could not make progress."""


@dataclass(frozen=True)
class BlockLayout:
    """Offsets of the ``(2j+1)^2`` blocks inside one flat complex vector.

    Blocks are ordered from ``j = N/2`` down; inside a block ``m`` ascends
    and the matrix is flattened row-major.
    """

    n_particles: int
    js: tuple[float, ...]
    degeneracies: tuple[int, ...]
    offsets: tuple[int, ...]
    size: int

    @classmethod
    def for_particles(cls, n: int) -> "BlockLayout":
        if n < 1:
            raise ValueError("need at least one particle")
        js = tuple(n / 2 - k for k in range(n // 2 + 1))
        offsets, pos = [], 0
        for j in js:
            offsets.append(pos)
            pos += int(round(2 * j + 1)) ** 2
        return cls(n, js, tuple(dicke_multiplicity(n, j) for j in js), tuple(offsets), pos)

    def dim(self, j: float) -> int:
        return int(round(2 * j + 1))

    def position(self, j: float) -> int:
        return self.js.index(j)

    def slice(self, j: float) -> slice:
        k = self.position(j)
        return slice(self.offsets[k], self.offsets[k] + self.dim(j) ** 2)

    @cached_property
    def trace_row(self) -> np.ndarray:
        """Row vector ``w`` with ``w . vec = sum_j d_j tr rho_j``."""
        w = np.zeros(self.size)
        for j, d in zip(self.js, self.degeneracies):
            n = self.dim(j)
            w[self.slice(j)] = d * np.eye(n).ravel()
        return w


@dataclass(frozen=True, eq=False)
class PermInvariantState:
    """Block density matrix of a permutation-symmetric ``N``-particle state."""

    layout: BlockLayout
    vec: np.ndarray = field(repr=False)

    def __post_init__(self):
        vec = np.array(self.vec, dtype=complex).reshape(-1)
        if vec.size != self.layout.size:
            raise ValueError(f"expected {self.layout.size} entries, got {vec.size}")
        vec.setflags(write=False)
        object.__setattr__(self, "vec", vec)

    @classmethod
    def from_symmetric(cls, state: StateVector) -> "PermInvariantState":
        """Pure state of the fully symmetric sector ``j = N/2``."""
        layout = BlockLayout.for_particles(state.spin.two_s)
        vec = np.zeros(layout.size, dtype=complex)
        psi = state.to(Axis.Z).amplitudes
        vec[layout.slice(layout.js[0])] = np.outer(psi, psi.conj()).ravel()
        return cls(layout, vec)

    def block(self, j: float) -> np.ndarray:
        n = self.layout.dim(j)
        return self.vec[self.layout.slice(j)].reshape(n, n)

    @property
    def blocks(self) -> dict[float, np.ndarray]:
        return {j: self.block(j) for j in self.layout.js}

    @property
    def degeneracy(self) -> dict[float, int]:
        return dict(zip(self.layout.js, self.layout.degeneracies))

    @property
    def top_block(self) -> np.ndarray:
        return self.block(self.layout.js[0])

    def trace(self) -> float:
        return float(np.real(self.layout.trace_row @ self.vec))

    def sector_weights(self) -> dict[float, float]:
        """Probability of each total spin ``j``."""
        return {j: float(d * np.real(np.trace(self.block(j)))) for j, d in self.degeneracy.items()}

    def expectation(self, collective: dict[float, np.ndarray]) -> complex:
        """``Tr(rho X)`` for a collective ``X`` given per block in the z basis."""
        return complex(sum(d * np.trace(self.block(j) @ collective[j]) for j, d in self.degeneracy.items()))

    def hermiticity_error(self) -> float:
        return max(float(np.max(np.abs(b - b.conj().T))) for b in self.blocks.values())

    def min_eigenvalue(self) -> float:
        return min(float(np.linalg.eigvalsh((b + b.conj().T) / 2)[0]) for b in self.blocks.values())

    def validate(self) -> None:
        """Raise ``ValueError`` if trace, Hermiticity or positivity is off."""
        problems = []
        if abs(self.trace() - 1) > _TRACE_TOL:
            problems.append(f"trace {self.trace():.12g}")
        if self.hermiticity_error() > _HERMITIAN_TOL:
            problems.append(f"hermiticity error {self.hermiticity_error():.3g}")
        if self.min_eigenvalue() < -_POSITIVITY_TOL:
            problems.append(f"min eigenvalue {self.min_eigenvalue():.3g}")
        if problems:
            raise ValueError("invalid density matrix: " + ", ".join(problems))


@dataclass(frozen=True)
class EnsembleConfig:
    """Parameters of one ensemble run.

    ``initial`` defaults to ``|S, 0>_x`` with ``S = N/2``.
    """

    n_particles: int
    upsilon: float = 1.0
    gamma_eff: float = 0.0
    t_grid: tuple[float, ...] = (0.0, 1.0)
    initial: StateVector | None = None
    max_particles: int = DEFAULT_MAX_PARTICLES

    def __post_init__(self):
        object.__setattr__(self, "t_grid", tuple(float(t) for t in self.t_grid))
        if self.n_particles < 1:
            raise ValueError("need at least one particle")
        if self.n_particles > self.max_particles:
            raise ValueError(f"N = {self.n_particles} exceeds the ceiling {self.max_particles}")
        if self.upsilon < 0 or self.gamma_eff < 0:
            raise ValueError("rates must be non-negative")
        if len(self.t_grid) == 0 or np.any(np.diff(self.t_grid) <= 0) or self.t_grid[0] < 0:
            raise ValueError("t_grid must be non-negative and strictly ascending")
        if self.initial is not None and self.initial.spin.two_s != self.n_particles:
            raise ValueError("initial state must have S = N/2")
        if self.initial is None and self.n_particles % 2:
            raise ValueError("the default |S,0>_x needs an even N; pass an initial state")

    @property
    def spin(self) -> Spin:
        return Spin(self.n_particles)

    def initial_state(self) -> PermInvariantState:
        psi = self.initial if self.initial is not None else dicke_state(self.spin, 0, Axis.X)
        return PermInvariantState.from_symmetric(psi.normalized())


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Sparse generator acting on :class:`PermInvariantState` vectors."""

    layout: BlockLayout
    matrix: sparse.csr_matrix = field(repr=False)
    upsilon: float
    gamma_eff: float

    def __call__(self, state: PermInvariantState) -> PermInvariantState:
        return PermInvariantState(self.layout, self.matrix @ state.vec)

    def trace_leak(self) -> float:
        """Largest change of the trace per unit time over unit basis vectors."""
        return float(np.max(np.abs(self.matrix.T @ self.layout.trace_row)))


def _commutator_pieces(left: np.ndarray, right: np.ndarray) -> sparse.spmatrix:
    """Superoperator of ``X -> left X + X right`` on row-major vectors."""
    n = left.shape[0]
    eye = sparse.identity(n, format="csr")
    return sparse.kron(sparse.csr_matrix(left), eye) + sparse.kron(eye, sparse.csr_matrix(right.T))


def _sandwich(a: np.ndarray, b: np.ndarray | None = None) -> sparse.spmatrix:
    """Superoperator of ``X -> a X b^+`` on row-major vectors."""
    b = a if b is None else b
    return sparse.kron(sparse.csr_matrix(a), sparse.csr_matrix(b.conj()))


def _cg_matrix(j1: float, j: float) -> np.ndarray:
    """``<j1 m1; 1/2 s | j m>`` arranged as rows ``(m1, s)`` and columns ``m``."""
    n1, n = int(round(2 * j1 + 1)), int(round(2 * j + 1))
    out = np.zeros((2 * n1, n))
    for a in range(n1):
        m1 = a - j1
        for s_idx, s in enumerate((-0.5, 0.5)):
            m = m1 + s
            if abs(m) <= j + 1e-9:
                out[2 * a + s_idx, int(round(m + j))] = clebsch_gordan(j1, m1, 0.5, s, j, m)
    return out


def _collective_local(op: np.ndarray, n: int, j: float) -> np.ndarray:
    """``sum_n op_n`` inside the spin-``j`` block, from the Pauli expansion of ``op``."""
    ops = build_operators(Spin.of(j), Axis.Z)
    out = np.trace(op) / 2 * n * np.eye(ops.sz.shape[0], dtype=complex)
    for a in "xyz":
        out = out + np.trace(_PAULI[a] @ op) * ops[a]
    return out


def _local_superoperator(layout: BlockLayout, op: np.ndarray) -> sparse.spmatrix:
    """``sum_n D'[op_n]`` on the block vector."""
    n = layout.n_particles
    total = sparse.csr_matrix((layout.size, layout.size), dtype=complex)
    js = set(layout.js)
    j1_values = BlockLayout.for_particles(n - 1).js if n > 1 else (0.0,)
    for j1 in j1_values:
        d1 = dicke_multiplicity(n - 1, j1)
        couplings = {j: _cg_matrix(j1, j) for j in (j1 + 0.5, j1 - 0.5) if j in js}
        lifted = np.kron(np.eye(int(round(2 * j1 + 1))), op)
        for j, cj in couplings.items():
            for jp, cjp in couplings.items():
                weight = n * d1 / layout.degeneracies[layout.position(jp)]
                total = total + _embed(layout, jp, j, weight * _sandwich(cjp.T @ lifted @ cj))
    # anticommutator part, block diagonal
    for j in layout.js:
        coll = _collective_local(op.conj().T @ op, n, j)
        total = total - 0.5 * _embed(layout, j, j, _commutator_pieces(coll, coll))
    return total


def _embed(layout: BlockLayout, j_out: float, j_in: float, block: sparse.spmatrix) -> sparse.csr_matrix:
    so, si = layout.slice(j_out), layout.slice(j_in)
    block = sparse.coo_matrix(block)
    return sparse.csr_matrix(
        (block.data, (block.row + so.start, block.col + si.start)), shape=(layout.size, layout.size)
    )


def _collective_superoperator(layout: BlockLayout) -> sparse.spmatrix:
    """``D[S_y]`` inside every block."""
    total = sparse.csr_matrix((layout.size, layout.size), dtype=complex)
    for j in layout.js:
        sy = build_operators(Spin.of(j), Axis.Z).sy
        sy2 = sy @ sy
        block = 2 * _sandwich(sy) - _commutator_pieces(sy2, sy2)
        total = total + _embed(layout, j, j, block)
    return total


def build_liouvillian(config: EnsembleConfig) -> Liouvillian:
    """Assemble the generator for ``config``'s particle number and rates."""
    layout = BlockLayout.for_particles(config.n_particles)
    matrix = config.upsilon * _collective_superoperator(layout)
    if config.gamma_eff > 0:
        local = sum(_local_superoperator(layout, op) for op in LOCAL_OPERATORS.values())
        matrix = matrix + config.gamma_eff * local
    matrix = sparse.csr_matrix(matrix)
    matrix.eliminate_zeros()
    return Liouvillian(layout, matrix, config.upsilon, config.gamma_eff)


def evolve(
    state: PermInvariantState,
    generator: Liouvillian,
    t_grid,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> list[PermInvariantState]:
    """Integrate with the explicit DOP853 pair and return one snapshot per time.

    Raises
    ------
    StiffnessError
        If the step size underflows.
    ValueError
        If the state is not normalized or a snapshot breaks the density
        matrix invariants.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if abs(state.trace() - 1) > _TRACE_TOL:
        raise ValueError(f"initial trace {state.trace()} is not 1")
    if not np.all(np.isfinite(generator.matrix.data)):
        raise ValueError("generator has non-finite entries")
    if generator.trace_leak() > _TRACE_DRIFT_TOL:
        raise ValueError(f"generator does not preserve the trace (leak {generator.trace_leak():.3g})")
    if t_grid.size == 1:
        return [state]
    matrix = generator.matrix
    sol = solve_ivp(
        lambda _, y: matrix @ y,
        (t_grid[0], t_grid[-1]),
        state.vec,
        method="DOP853",
        t_eval=t_grid,
        rtol=rtol,
        atol=atol,
    )
    if sol.status != 0:
        reached = sol.t[-1] if sol.t.size else t_grid[0]
        raise StiffnessError(f"{sol.message} (reached t = {reached:.6g} of {t_grid[-1]:.6g}, {sol.nfev} evaluations)")
    out = []
    for k in range(t_grid.size):
        snap = PermInvariantState(state.layout, sol.y[:, k])
        if abs(snap.trace() - state.trace()) > _TRACE_DRIFT_TOL * max(1, k):
            raise StiffnessError(f"trace drifted to {snap.trace():.15g} at t = {t_grid[k]:.6g}")
        snap.validate()
        out.append(snap)
    return out


def kitten_fidelity(state: PermInvariantState, spec: KittenSpec) -> float:
    """``<chi| rho |chi>`` for a Kitten state of the symmetric sector."""
    if spec.spin.two_s != state.layout.n_particles:
        raise ValueError(f"Kitten state has S = {spec.S}, ensemble has S = {state.layout.n_particles / 2}")
    chi = kitten_state(spec).to(Axis.Z).amplitudes
    return float(np.real(np.vdot(chi, state.top_block @ chi)))


@dataclass(frozen=True)
class FidelityFits:
    """The two closed-form curves ``d^2 e^{-gN t}(1 - e^{-4 U m^2 t})`` and ``d^2 (e^{-gN t} + e^{-4 U m^2 t})``."""

    growth: np.ndarray
    decay: np.ndarray


def fidelity_fits(spin: Spin, m: int, upsilon: float, gamma_eff: float, n_particles: int, times) -> FidelityFits:
    t = np.asarray(times, dtype=float)
    d2 = wigner_d_m0(spin)[m] ** 2
    noise = np.exp(-gamma_eff * n_particles * t)
    pair = np.exp(-4 * upsilon * m**2 * t)
    return FidelityFits(d2 * noise * (1 - pair), d2 * (noise + pair))


@dataclass(frozen=True)
class FitAssignment:
    """Which parity follows which closed-form curve, with residuals.

    ``growth`` and ``decay`` name the parity (``"plus"`` or ``"minus"``) that
    the least-squares comparison attached to each curve.
    """

    m: int
    growth: str
    decay: str
    max_deviation: float
    rms: float


def assign_fits(m: int, plus: np.ndarray, minus: np.ndarray, fits: FidelityFits) -> FitAssignment:
    """Pick the parity-to-curve pairing with the smaller squared error."""
    plus, minus = np.asarray(plus), np.asarray(minus)
    straight = np.sum((plus - fits.growth) ** 2 + (minus - fits.decay) ** 2)
    crossed = np.sum((plus - fits.decay) ** 2 + (minus - fits.growth) ** 2)
    if straight <= crossed:
        growth, decay, err = "plus", "minus", np.concatenate([plus - fits.growth, minus - fits.decay])
    else:
        growth, decay, err = "minus", "plus", np.concatenate([minus - fits.growth, plus - fits.decay])
    return FitAssignment(m, growth, decay, float(np.max(np.abs(err))), float(np.sqrt(np.mean(err**2))))


@dataclass(frozen=True)
class TimescaleCheck:
    """``ok`` iff ``Upsilon > gamma_eff N``; ``margin = Upsilon / (gamma_eff N)``.

    With no local noise the margin is the sentinel :data:`MARGIN_CAP`.
    """

    ok: bool
    margin: float


def timescale_check(config: EnsembleConfig) -> TimescaleCheck:
    noise = config.gamma_eff * config.n_particles
    if noise == 0:
        return TimescaleCheck(config.upsilon > 0, MARGIN_CAP)
    margin = config.upsilon / noise
    return TimescaleCheck(config.upsilon > noise, margin)
