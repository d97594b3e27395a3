"""Quantum-jump unraveling of ``d rho/dt = Upsilon D[S_y] rho``.

The dissipator uses ``D[O] rho = 2 O rho O^+ - rho O^+ O - O^+ O rho``, so a
trajectory decays as ``exp(-Upsilon S_y^2 t)`` between jumps and jumps with
rate ``2 Upsilon <S_y^2>``.  Everything runs in the y eigenbasis where both
steps are diagonal: the no-jump evolution multiplies ``c_m`` by
``exp(-Upsilon m^2 dt)`` and a jump multiplies ``c_m`` by ``m``.

Two jump samplers are provided.  ``"exact"`` draws the whole waiting time at
once by inverting the survival probability
``sum_m |c_m|^2 exp(-2 Upsilon m^2 t)``; ``"bernoulli"`` is the fixed-step
scheme (jump with probability ``rate * dt`` each step) kept as a reference.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .spin import Axis, KittenSpec, Parity, Spin, StateVector, dicke_state, kitten_state, overlap, wigner_d_m0

__all__ = [
    "NumericError",
    "TrajectoryConfig",
    "TrajectoryResult",
    "CycleHistogram",
    "decay_between_jumps",
    "jump_rate",
    "sample_next_jump",
    "apply_jump",
    "run_trajectory",
    "run_trajectories",
    "run_histogram",
    "trajectory_seeds",
    "estimate_cycle_from_rate",
    "replay_trajectory",
    "overlap_traces",
    "cycle_probabilities",
    "DEFAULT_RATE_WINDOW",
]

#: default photon-counting window for :func:`estimate_cycle_from_rate`, in units of 1/Upsilon
DEFAULT_RATE_WINDOW = 10.0

_MAX_BISECTION = 200
_EPS4 = 4 * np.finfo(float).eps


class NumericError(RuntimeError):
    """A numerical routine failed in a way that should not happen for valid input."""


@dataclass(frozen=True)
class TrajectoryConfig:
    """Parameters of a single quantum-jump trajectory.

    Parameters
    ----------
    spin : Spin
    upsilon : float
        Collective rate in ``Upsilon D[S_y]``.
    t_max : float
        Simulation horizon.
    seed : int
        Seed of this trajectory's private counter-based (Philox) stream.
    jump_sampler : {"exact", "bernoulli"}
    dt : float, optional
        Step of the Bernoulli sampler; must satisfy ``dt * 2 Upsilon S^2 < 0.1``.
    settle_epsilon : float
        A trajectory has settled in cycle ``m`` once the ``{m, -m}`` population
        exceeds ``1 - settle_epsilon``.
    initial_state : StateVector, optional
        Defaults to ``|S, 0>_x``.
    stop_at_settle : bool
        Stop as soon as the trajectory settles instead of running to ``t_max``.
    """

    spin: Spin
    upsilon: float = 1.0
    t_max: float = 20.0
    seed: int = 0
    jump_sampler: str = "exact"
    dt: float | None = None
    settle_epsilon: float = 1e-6
    initial_state: StateVector | None = None
    stop_at_settle: bool = False

    def __post_init__(self):
        if not self.upsilon > 0:
            raise ValueError("upsilon must be positive")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if not 0 < self.settle_epsilon < 1:
            raise ValueError("settle_epsilon must lie in (0, 1)")
        if self.jump_sampler not in ("exact", "bernoulli"):
            raise ValueError(f"unknown jump_sampler {self.jump_sampler!r}")
        if self.jump_sampler == "bernoulli":
            if self.dt is None or not self.dt > 0:
                raise ValueError("bernoulli sampler needs a positive dt")
            if self.dt * 2 * self.upsilon * self.spin.S**2 >= 0.1:
                raise ValueError("dt * 2 Upsilon S^2 must be below 0.1")
        if self.initial_state is not None and self.initial_state.spin != self.spin:
            raise ValueError("initial_state has a different spin")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")

    def initial(self) -> StateVector:
        state = self.initial_state if self.initial_state is not None else dicke_state(self.spin, 0, Axis.X)
        return state.to(Axis.Y).normalized()


@dataclass(frozen=True, eq=False)
class TrajectoryResult:
    jump_times: np.ndarray = field(repr=False)
    settled_m: int | None
    settled_parity: Parity | None
    settle_time: float | None
    final_state: StateVector = field(repr=False)
    t_end: float = 0.0

    @property
    def n_jumps(self) -> int:
        return len(self.jump_times)


@dataclass(frozen=True)
class CycleHistogram:
    """Counts of the cycle index each trajectory settled in.

    ``counts`` has one key per parity-allowed ``m``; trajectories that had not
    settled by ``t_max`` are tallied in ``unsettled`` instead.
    """

    spin: Spin
    counts: dict
    n_trajectories: int
    unsettled: int = 0

    def frequencies(self) -> dict:
        return {m: c / self.n_trajectories for m, c in self.counts.items()}


# -- elementary steps ---------------------------------------------------------


def _require_y(state: StateVector):
    if state.basis is not Axis.Y:
        raise ValueError("trajectory operations work in the y basis")


def _decay_amps(amps: np.ndarray, m: np.ndarray, dt: float, upsilon: float) -> np.ndarray:
    support = np.abs(amps) > 0
    if not support.any():
        raise NumericError("zero state vector")
    m2 = m**2
    # shift exponents by the slowest occupied component to avoid underflow
    shift = m2[support].min()
    out = np.zeros_like(amps, dtype=complex)
    out[support] = amps[support] * np.exp(-upsilon * (m2[support] - shift) * dt)
    norm = np.linalg.norm(out)
    assert norm > 0, "decay annihilated a normalized state"
    return out / norm


def decay_between_jumps(state: StateVector, dt: float, upsilon: float) -> StateVector:
    """No-jump evolution ``exp(-Upsilon S_y^2 dt)`` followed by renormalization."""
    _require_y(state)
    return StateVector(state.spin, Axis.Y, _decay_amps(state.amplitudes, state.spin.m_values, dt, upsilon))


def jump_rate(state: StateVector, upsilon: float) -> float:
    """``2 Upsilon <S_y^2>``."""
    _require_y(state)
    return float(2 * upsilon * np.dot(state.spin.m_values**2, state.populations()))


def apply_jump(state: StateVector) -> StateVector:
    """Apply ``S_y`` and renormalize; the ``m = 0`` component is annihilated."""
    _require_y(state)
    out = state.amplitudes * state.spin.m_values
    norm = np.linalg.norm(out)
    if norm == 0:
        raise ValueError("jump has zero probability: state is supported only on m = 0")
    return StateVector(state.spin, Axis.Y, out / norm)


def _waiting_times(log_w: np.ndarray, k2: np.ndarray, upsilon: float, u: np.ndarray) -> np.ndarray:
    """Row-wise solution of ``sum_k w_k exp(-2 Upsilon k^2 t) = u``.

    ``log_w`` holds normalized log weights, one row per trajectory.  Rows whose
    draw falls at or below the weight of the ``k = 0`` (dark) column get
    ``inf``: they never jump again.  Every operation is elementwise or a
    reduction along a row, so a row's result does not depend on its batch.
    """
    rates = 2 * upsilon * k2
    dark_col = k2 == 0
    if dark_col.any():
        dark = np.exp(log_w[:, dark_col]).sum(axis=1)
    else:
        dark = np.zeros(len(u))
    tau = np.full(len(u), math.inf)
    live = u > dark
    tau[live & (u >= 1.0)] = 0.0
    todo = np.flatnonzero(live & (u < 1.0))
    if todo.size == 0:
        return tau
    log_b = log_w[np.ix_(todo, np.flatnonzero(~dark_col))]
    r = rates[~dark_col]
    target = np.log(u[todo] - dark[todo])
    # the log of the bright survival is convex and decreasing, so Newton
    # iterates started at t = 0 increase monotonically onto the root
    t = np.zeros(todo.size)
    pending = np.arange(todo.size)
    for _ in range(_MAX_BISECTION):
        z = log_b[pending] - r * t[pending, None]
        top = z.max(axis=1)
        w = np.exp(z - top[:, None])
        total = w.sum(axis=1)
        step = (top + np.log(total) - target[pending]) * total / (w * r).sum(axis=1)
        done = step <= _EPS4 * t[pending]
        # a non-positive step means rounding has reached the root
        t[pending] += np.where(done, np.maximum(step, 0.0), step)
        pending = pending[~done]
        if pending.size == 0:
            tau[todo] = t
            return tau
    raise NumericError("waiting-time inversion did not converge")


def _waiting_time(pops: np.ndarray, k2: np.ndarray, upsilon: float, u: float) -> float:
    with np.errstate(divide="ignore"):
        log_w = np.log(np.asarray(pops, dtype=float))[None, :]
    return float(_waiting_times(log_w, np.asarray(k2, dtype=float), upsilon, np.array([u]))[0])


def sample_next_jump(
    state: StateVector,
    upsilon: float,
    rng: np.random.Generator,
    horizon: float = math.inf,
    *,
    sampler: str = "exact",
    dt: float | None = None,
) -> float | None:
    """Waiting time until the next jump, or ``None``.

    ``None`` means no jump occurs within ``horizon``; for the exact sampler
    this includes the case where the draw falls below the weight of the dark
    ``m = 0`` component, so that no jump ever happens.
    """
    _require_y(state)
    if sampler == "exact":
        u = 1.0 - rng.random()  # in (0, 1]
        t = _waiting_time(state.populations(), state.spin.m_values**2, upsilon, u)
        return None if (math.isinf(t) or t > horizon) else t
    if sampler != "bernoulli" or dt is None:
        raise ValueError("bernoulli sampling needs dt")
    with np.errstate(divide="ignore"):
        log_w = np.log(state.populations())
    t = _bernoulli_wait(log_w, state.spin.m_values**2, upsilon, dt, horizon, rng)
    return None if math.isinf(t) else t


# -- trajectories -------------------------------------------------------------


def _pair_populations(pops: np.ndarray, S: float) -> np.ndarray:
    """Population of each ``{m, -m}`` pair, indexed by ``|m|`` ascending."""
    offset = S % 1
    m_abs = np.abs(np.arange(pops.size) - S)
    return np.bincount(np.rint(m_abs - offset).astype(int), weights=pops)


def _normalize_log(lw: np.ndarray) -> np.ndarray:
    top = lw.max()
    return lw - (top + np.log(np.exp(lw - top).sum()))


def _pair_fraction_after(lw: np.ndarray, k2: np.ndarray, idx: int, tau: float, upsilon: float) -> float:
    z = lw - 2 * upsilon * k2 * tau
    top = z.max()
    w = np.exp(z - top)
    return float(w[idx] / w.sum())


def _crossing_time(lw, k2, idx, upsilon, threshold, t_hi):
    """Earliest decay time at which pair ``idx`` (the slowest occupied pair) holds ``threshold``.

    Only the slowest pair gains weight under the decay, so its fraction is
    monotone and the crossing is unique.  Returns ``None`` if it is not
    reached before ``t_hi``.
    """

    def f(tau):
        return _pair_fraction_after(lw, k2, idx, tau, upsilon) - threshold

    if not math.isinf(t_hi) and f(t_hi) < 0:
        return None
    if f(0.0) >= 0:
        return 0.0
    if math.isinf(t_hi):
        others = k2[(np.arange(k2.size) != idx) & np.isfinite(lw)]
        gap = (others - k2[idx]).min()
        # fraction >= 1 - sum_other exp(lw_j - lw_idx - 2 Upsilon gap tau)
        t_hi = max((np.log(np.exp(lw - lw[idx]).sum()) - math.log(1 - threshold)) / (2 * upsilon * gap), 1e-12)
        while f(t_hi) < 0:
            t_hi *= 2.0
    try:
        return float(brentq(f, 0.0, t_hi, xtol=1e-14, maxiter=_MAX_BISECTION))
    except RuntimeError as exc:
        raise NumericError(f"settling-time search failed: {exc}") from exc


def _parity_of(amps: np.ndarray, spin: Spin, k: int) -> Parity | None:
    """Which Kitten state of cycle ``k`` the state is closest to."""
    if k == 0:
        return None
    fp = abs(np.vdot(kitten_state(KittenSpec(spin, k, Parity.PLUS)).amplitudes, amps)) ** 2
    fm = abs(np.vdot(kitten_state(KittenSpec(spin, k, Parity.MINUS)).amplitudes, amps)) ** 2
    return Parity.PLUS if fp >= fm else Parity.MINUS


def _state_after(initial: np.ndarray, m: np.ndarray, n_jumps: int, t: float, upsilon: float) -> np.ndarray:
    """Closed form ``c_m(0) m^n exp(-Upsilon m^2 t)``, normalized in log space."""
    mag = np.abs(initial)
    support = mag > 0
    if n_jumps > 0:
        support &= m != 0
    log_mag = np.full(m.size, -np.inf)
    ms = m[support]
    jump_gain = n_jumps * np.log(np.abs(ms)) if n_jumps > 0 else 0.0
    log_mag[support] = np.log(mag[support]) + jump_gain - upsilon * ms**2 * t
    log_mag = 0.5 * _normalize_log(2 * log_mag)
    phase = np.where(support, np.exp(1j * np.angle(initial)), 0)
    if n_jumps % 2:
        phase = phase * np.sign(m)
    return np.exp(log_mag) * phase


def _normalize_log_rows(lw: np.ndarray) -> np.ndarray:
    top = lw.max(axis=1, keepdims=True)
    return lw - (top + np.log(np.exp(lw - top).sum(axis=1, keepdims=True)))


@dataclass
class _Batch:
    """Lockstep state of many trajectories sharing one config."""

    settled: np.ndarray  # pair index or -1
    settle_time: np.ndarray
    t: np.ndarray
    n_jumps: np.ndarray
    jump_rows: list
    jump_times: list


def _simulate(config: TrajectoryConfig, seeds: Sequence[int]) -> _Batch:
    """Advance one trajectory per seed, one jump per sweep, until all are done.

    Between jumps only the ``{m, -m}`` pair weights matter for the jump
    statistics, so each trajectory is a row of log pair weights; the
    amplitudes follow in closed form (see :func:`_state_after`).
    """
    spin = config.spin
    ups = config.upsilon
    threshold = 1.0 - config.settle_epsilon
    exact = config.jump_sampler == "exact"
    initial = np.asarray(config.initial().amplitudes)

    pops = _pair_populations(np.abs(initial) ** 2, spin.S)
    k = np.arange(pops.size) + spin.S % 1
    k2 = k**2
    log_k2 = np.log(np.where(k > 0, k2, 1.0))
    with np.errstate(divide="ignore"):
        lw0 = _normalize_log(np.log(pops))

    n = len(seeds)
    rngs = [np.random.Generator(np.random.Philox(int(s))) for s in seeds]
    lw = np.tile(lw0, (n, 1))
    b = _Batch(np.full(n, -1), np.full(n, np.nan), np.zeros(n), np.zeros(n, dtype=int), [], [])
    active = np.ones(n, dtype=bool)

    def check(rows):
        top = np.argmax(lw[rows], axis=1)
        ok = np.exp(lw[rows, top]) > threshold
        new = np.where(ok, top, -1)
        changed = ok & (new != b.settled[rows])
        b.settle_time[rows[changed]] = b.t[rows[changed]]
        b.settle_time[rows[~ok]] = np.nan
        b.settled[rows] = new

    check(np.arange(n))
    while True:
        active &= b.t < config.t_max
        if config.stop_at_settle:
            active &= b.settled < 0
        rows = np.flatnonzero(active)
        if rows.size == 0:
            return b
        horizon = config.t_max - b.t[rows]
        if exact:
            u = np.array([1.0 - rngs[i].random() for i in rows])
            tau = _waiting_times(lw[rows], k2, ups, u)
        else:
            tau = np.array(
                [
                    _bernoulli_wait(lw[i], k2, ups, config.dt, h, rngs[i])
                    for i, h in zip(rows, horizon, strict=True)
                ]
            )

        # settling during the coming stretch of no-jump decay; only the slowest
        # occupied pair gains weight, so checking the end of the stretch suffices
        stopped = np.zeros(rows.size, dtype=bool)
        cand = np.flatnonzero(b.settled[rows] < 0)
        if cand.size:
            sub = lw[rows[cand]]
            slow = np.argmax(np.isfinite(sub), axis=1)
            dark = np.isinf(tau[cand]) if exact else np.zeros(cand.size, dtype=bool)
            z = sub - 2 * ups * k2 * np.minimum(tau[cand], horizon[cand])[:, None]
            w = np.exp(z - z.max(axis=1, keepdims=True))
            frac = w[np.arange(cand.size), slow] / w.sum(axis=1)
            cand = cand[dark | (frac >= threshold)]
        for j in cand:
            i = rows[j]
            idx = int(np.flatnonzero(np.isfinite(lw[i]))[0])
            dark = exact and math.isinf(tau[j])
            cross = _crossing_time(lw[i], k2, idx, ups, threshold, math.inf if dark else min(tau[j], horizon[j]))
            if cross is None:
                continue
            b.settled[i] = idx
            b.settle_time[i] = b.t[i] + cross
            if config.stop_at_settle:
                # freeze at the settling instant; the pending jump never happens
                lw[i] = _normalize_log(lw[i] - 2 * ups * k2 * min(cross, horizon[j]))
                b.t[i] += min(cross, horizon[j])
                stopped[j] = True

        finish = (tau > horizon) & ~stopped
        b.t[rows[finish]] = config.t_max
        go = ~(tau > horizon) & ~stopped
        jr = rows[go]
        if jr.size:
            b.t[jr] += tau[go]
            b.n_jumps[jr] += 1
            b.jump_rows.append(jr)
            b.jump_times.append(b.t[jr].copy())
            new_lw = lw[jr] - 2 * ups * k2 * tau[go][:, None] + log_k2
            if k[0] == 0:
                new_lw[:, 0] = -np.inf
            lw[jr] = _normalize_log_rows(new_lw)
            check(jr)


def _results(config: TrajectoryConfig, batch: _Batch) -> list[TrajectoryResult]:
    spin = config.spin
    initial = np.asarray(config.initial().amplitudes)
    n = len(batch.t)
    if batch.jump_rows:
        rows = np.concatenate(batch.jump_rows)
        times = np.concatenate(batch.jump_times)
        order = np.argsort(rows, kind="stable")
        per_row = np.split(times[order], np.cumsum(np.bincount(rows, minlength=n))[:-1])
    else:
        per_row = [np.zeros(0)] * n
    offset = spin.S % 1
    out = []
    for i in range(n):
        amps = _state_after(initial, spin.m_values, int(batch.n_jumps[i]), float(batch.t[i]), config.upsilon)
        settled_m = None
        if batch.settled[i] >= 0:
            settled_m = int(batch.settled[i]) if spin.is_integer else float(batch.settled[i] + offset)
        parity = _parity_of(amps, spin, settled_m) if (settled_m and spin.is_integer) else None
        st = batch.settle_time[i]
        out.append(
            TrajectoryResult(
                jump_times=per_row[i],
                settled_m=settled_m,
                settled_parity=parity,
                settle_time=None if np.isnan(st) else float(st),
                final_state=StateVector(spin, Axis.Y, amps),
                t_end=float(batch.t[i]),
            )
        )
    return out


def run_trajectory(config: TrajectoryConfig) -> TrajectoryResult:
    """Simulate one trajectory until ``t_max`` (or until it settles, if requested).

    A trajectory settles in cycle ``m`` when the ``{m, -m}`` pair carries more
    than ``1 - settle_epsilon`` of the population.  With the exact sampler a
    draw below the ``m = 0`` weight means no further jump ever occurs and the
    trajectory settles in the dark ``m = 0`` cycle.  The result is a
    deterministic function of the config.
    """
    return _results(config, _simulate(config, [config.seed]))[0]


def run_trajectories(config: TrajectoryConfig, seeds: Sequence[int]) -> list[TrajectoryResult]:
    """Run one trajectory per seed; identical to calling :func:`run_trajectory` per seed."""
    return _results(config, _simulate(config, list(seeds)))


def _bernoulli_wait(log_w, k2, upsilon, dt, horizon, rng, chunk: int = 256) -> float:
    """Fixed-step waiting time: each step of length ``dt`` ends in a jump with
    probability ``rate * dt``, the rate taken from the state at the start of
    the step.  Steps are evaluated ``chunk`` at a time; ``inf`` if no jump
    occurs within ``horizon``."""
    n_steps = int(math.floor(horizon / dt * (1 + 1e-12)))
    done = 0
    while done < n_steps:
        i = np.arange(done, min(done + chunk, n_steps))
        z = log_w - 2 * upsilon * k2 * (i * dt)[:, None]
        top = z.max(axis=1, keepdims=True)
        w = np.exp(z - top)
        rate = 2 * upsilon * (w * k2).sum(axis=1) / w.sum(axis=1)
        hit = np.flatnonzero(rng.random(i.size) < rate * dt)
        if hit.size:
            return float((i[hit[0]] + 1) * dt)
        done += i.size
    return math.inf


def replay_trajectory(
    initial: StateVector, jump_times: Sequence[float], upsilon: float, times: Sequence[float]
) -> list[StateVector]:
    """Reconstruct the pure state at each of ``times`` from the recorded jumps.

    Between jumps the evolution is deterministic, so a jump record is a
    complete description of the trajectory.
    """
    state = initial.to(Axis.Y).normalized()
    m = state.spin.m_values
    amps = np.array(state.amplitudes)
    out = []
    t_now = 0.0
    jumps = list(jump_times)
    j = 0
    for t in sorted(times):
        while j < len(jumps) and jumps[j] <= t:
            amps = _decay_amps(amps, m, jumps[j] - t_now, upsilon) * m
            amps /= np.linalg.norm(amps)
            t_now = jumps[j]
            j += 1
        out.append(StateVector(state.spin, Axis.Y, _decay_amps(amps, m, t - t_now, upsilon)))
    return out


def overlap_traces(states: Sequence[StateVector], m: int) -> dict:
    """Overlaps ``<psi|S,-m>_y`` and ``<psi|S,m>_x`` along a trajectory."""
    spin = states[0].spin
    y_ref = dicke_state(spin, -m, Axis.Y)
    x_ref = dicke_state(spin, m, Axis.X)
    return {
        "y_minus_m": np.array([overlap(s, y_ref) for s in states]),
        "x_m": np.array([overlap(s, x_ref) for s in states]),
        "y_populations": np.array([s.populations() for s in states]),
    }


# -- ensembles ----------------------------------------------------------------


def trajectory_seeds(master_seed: int, n: int) -> list[int]:
    """Per-trajectory 64-bit seeds; seed ``i`` depends only on ``(master_seed, i)``."""
    root = np.random.SeedSequence(int(master_seed))
    seeds = []
    for child in root.spawn(n):
        lo, hi = child.generate_state(2, np.uint32)
        seeds.append(int(lo) | (int(hi) << 32))
    return seeds


def _run_chunk(args):
    config, seeds = args
    settled = _simulate(config, seeds).settled
    return [None if s < 0 else int(s) for s in settled]


def run_histogram(
    config: TrajectoryConfig, n_trajectories: int, worker_count: int | None = None, master_seed: int | None = None
) -> CycleHistogram:
    """Settled-cycle histogram over independently seeded trajectories.

    Seeds are derived from ``master_seed`` (default ``config.seed``) by
    trajectory index, and chunks are merged in index order, so the result is
    identical for any ``worker_count``.
    """
    if n_trajectories < 1:
        raise ValueError("n_trajectories must be at least 1")
    spin = config.spin
    if not spin.is_integer:
        raise ValueError("cycle histograms are defined for integer spin")
    master = config.seed if master_seed is None else master_seed
    seeds = trajectory_seeds(master, n_trajectories)
    workers = worker_count or int(os.environ.get("SPINCATS_WORKERS", "1"))
    workers = max(1, min(workers, n_trajectories))
    base = replace(config, stop_at_settle=True)
    chunks = [seeds[i::workers] for i in range(workers)]
    if workers == 1:
        results = [_run_chunk((base, chunks[0]))]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, [(base, c) for c in chunks]))
    settled = [None] * n_trajectories
    for w, res in enumerate(results):
        settled[w::workers] = res

    S = spin.int_s
    counts = {m: 0 for m in range(S % 2, S + 1, 2)}
    unsettled = 0
    for m in settled:
        if m is None:
            unsettled += 1
        else:
            counts[m] = counts.get(m, 0) + 1
    return CycleHistogram(spin, counts, n_trajectories, unsettled)


def cycle_probabilities(spin: Spin) -> dict:
    """Probability of each entangled-state cycle from ``|S,0>_x``: ``2 d^2`` (``d^2`` for m = 0)."""
    d = wigner_d_m0(spin)
    S = spin.int_s
    return {m: (1 if m == 0 else 2) * d[m] ** 2 for m in range(S % 2, S + 1, 2)}


def estimate_cycle_from_rate(
    jump_times: Sequence[float],
    window: float,
    upsilon: float,
    t_end: float | None = None,
) -> int | None:
    """Cycle index from the photon-count rate in the final ``window``.

    Inverts ``rate = 2 Upsilon m^2``: ``m_hat = round(sqrt(count / (2 Upsilon window)))``.
    Returns ``None`` when fewer than two jumps fall inside the window.
    """
    times = np.asarray(jump_times, dtype=float)
    if window <= 0:
        raise ValueError("window must be positive")
    if times.size == 0:
        return None
    end = float(times[-1]) if t_end is None else float(t_end)
    count = int(np.count_nonzero((times > end - window) & (times <= end)))
    if count < 2:
        return None
    return int(round(math.sqrt(count / (2 * upsilon * window))))
