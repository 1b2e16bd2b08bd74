"""Zeno-controlled evolution: projective measurements interleaved with free steps.

Measurements are selective: after every projection the discarded outcome is
dropped and the surviving norm is recorded.  States are renormalized only at
the end of a run, so the product of per-slice norm ratios is the survival
probability of the whole schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .dynamics import PairSpec, apply_pair_gate, evolve_free, pair_propagator
from .register import QubitId, QubitRegister, RegisterError, as_qubit, norm_squared, normalize


class ZeroSurvivalError(RuntimeError):
    """Every branch of the state was removed by a projection."""

    def __init__(self, phase: int, slice_index: int):
        super().__init__(f"state annihilated by projection in phase {phase}, slice {slice_index}")
        self.phase = phase
        self.slice_index = slice_index


@dataclass(frozen=True)
class Projector:
    """Keep only the branch where ``target`` equals ``kept_value``."""

    target: QubitId
    kept_value: int = 0

    def __post_init__(self):
        object.__setattr__(self, "target", as_qubit(self.target))
        if self.kept_value not in (0, 1):
            raise ValueError(f"kept_value must be 0 or 1, got {self.kept_value!r}")


def project(register: QubitRegister, p: Projector):
    """Return ``(projected register, surviving norm**2)``.  No renormalization."""
    m = register.num_pairs
    n = 2 * m
    axis = n - 1 - p.target.bit(m)
    psi = register.amplitudes.reshape((2,) * n).copy()
    idx = [slice(None)] * n
    idx[axis] = 1 - p.kept_value
    psi[tuple(idx)] = 0.0
    out = register.with_amplitudes(psi.reshape(-1))
    return out, norm_squared(out)


# --- per-pair modes --------------------------------------------------------

@dataclass(frozen=True)
class Free:
    def __str__(self):
        return "free"


@dataclass(frozen=True)
class IdealFrozen:
    """The infinite-measurement limit: the pair's propagator is omitted entirely.

    At omega = 0 this is the exact limit of :class:`SlicedZeno`; for omega != 0
    the sliced pair additionally keeps its diagonal omega phases.
    """

    def __str__(self):
        return "frozen"


@dataclass(frozen=True)
class SlicedZeno:
    projector: Projector
    slices: int

    def __post_init__(self):
        if not isinstance(self.slices, (int, np.integer)) or self.slices < 1:
            raise ValueError(f"slice count must be a positive integer, got {self.slices!r}")

    def __str__(self):
        return f"zeno:{self.slices}:{self.projector.target}={self.projector.kept_value}"


PairMode = Union[Free, IdealFrozen, SlicedZeno]
FREE = Free()
FROZEN = IdealFrozen()


@dataclass(frozen=True)
class Phase:
    duration: float
    modes: Mapping[int, PairMode] = field(default_factory=dict)

    def mode(self, k: int) -> PairMode:
        return self.modes.get(k, FREE)


@dataclass(frozen=True)
class ZenoSchedule:
    phases: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(self.phases))

    @property
    def total_duration(self) -> float:
        return float(sum(ph.duration for ph in self.phases))

    def validate(self, num_pairs: int):
        for i, ph in enumerate(self.phases):
            if not (math.isfinite(ph.duration) and ph.duration >= 0):
                raise ValueError(f"phase {i}: duration must be finite and >= 0, got {ph.duration}")
            for k, mode in ph.modes.items():
                if not 1 <= k <= num_pairs:
                    raise ValueError(f"phase {i}: pair index {k} out of range [1, {num_pairs}]")
                if not isinstance(mode, (Free, IdealFrozen, SlicedZeno)):
                    raise ValueError(f"phase {i}: unknown mode {mode!r} for pair {k}")
                if isinstance(mode, SlicedZeno) and mode.projector.target.pair != k:
                    raise ValueError(
                        f"phase {i}: projector on {mode.projector.target} does not belong to pair {k}")

    def free_time(self, k: int) -> float:
        """Total time pair ``k`` spends in Free mode."""
        return float(sum(ph.duration for ph in self.phases if isinstance(ph.mode(k), Free)))

    def with_slices(self, n: int) -> "ZenoSchedule":
        """Copy with every SlicedZeno slice count replaced by ``n``."""
        phases = []
        for ph in self.phases:
            modes = {k: SlicedZeno(md.projector, n) if isinstance(md, SlicedZeno) else md
                     for k, md in ph.modes.items()}
            phases.append(Phase(ph.duration, modes))
        return ZenoSchedule(phases)


@dataclass(frozen=True)
class PhaseLog:
    phase: int
    norm_squared: float
    slice_ratios: tuple = ()
    observables: Optional[dict] = None


@dataclass(frozen=True)
class RunRecord:
    final_state: QubitRegister
    survival_probability: float
    per_phase_log: tuple = ()

    def slice_ratio_product(self) -> float:
        out = 1.0
        for log in self.per_phase_log:
            for r in log.slice_ratios:
                out *= r
        return out


def _spec_map(pairs: Sequence[PairSpec], num_pairs: int) -> dict:
    specs = {}
    for p in pairs:
        if p.k in specs:
            raise ValueError(f"pair {p.k} listed more than once")
        if p.k > num_pairs:
            raise RegisterError(f"pair index {p.k} out of range [1, {num_pairs}]")
        specs[p.k] = p
    missing = [k for k in range(1, num_pairs + 1) if k not in specs]
    if missing:
        raise ValueError(f"no PairSpec for pairs {missing}")
    return specs


def _projected(register, p, prev_n2, phase, slice_index, ratios):
    register, n2 = project(register, p)
    if not n2 > 0.0:
        raise ZeroSurvivalError(phase, slice_index)
    ratios.append(n2 / prev_n2)
    return register, n2


def zeno_evolve_pair(register: QubitRegister, pairs: Sequence[PairSpec], j: int,
                     p: Projector, T: float, N: int) -> RunRecord:
    """N repetitions of [free evolution of all pairs for T/N, then project ``p``]."""
    specs = _spec_map(pairs, register.num_pairs)
    if j not in specs:
        raise RegisterError(f"pair index {j} out of range [1, {register.num_pairs}]")
    mode = SlicedZeno(p, N)  # validates N
    if p.target.pair != j:
        raise ValueError(f"projector on {p.target} does not belong to pair {j}")
    tau = T / mode.slices
    n2 = norm_squared(register)
    initial = n2
    ratios = []
    for i in range(mode.slices):
        register = evolve_free(register, list(specs.values()), tau)
        register, n2 = _projected(register, p, n2, 0, i, ratios)
    log = PhaseLog(0, n2, tuple(ratios))
    return RunRecord(normalize(register), n2 / initial, (log,))


def run_phase(register: QubitRegister, specs: Mapping[int, PairSpec], phase: Phase,
              index: int = 0, until: Optional[float] = None):
    """Run one phase (or its first ``until`` time units) without renormalizing.

    Returns ``(register, slice_ratios)``.  The pair terms commute, so free
    pairs are advanced in one step and each sliced pair is stepped on its own.
    For a partial sliced phase the completed slices are run followed by an
    unmeasured remainder.
    """
    span = phase.duration if until is None else min(max(until, 0.0), phase.duration)
    ratios = []
    n2 = norm_squared(register)
    for k in sorted(specs):
        mode = phase.mode(k)
        spec = specs[k]
        if isinstance(mode, IdealFrozen):
            continue
        if isinstance(mode, Free):
            register = apply_pair_gate(register, k, pair_propagator(spec, span))
            continue
        tau = phase.duration / mode.slices
        if until is None:
            done, rest = mode.slices, 0.0
        else:
            done = min(mode.slices, int(math.floor(span / tau + 1e-9))) if tau > 0 else mode.slices
            rest = max(span - done * tau, 0.0)
        step = pair_propagator(spec, tau)
        for i in range(done):
            register = apply_pair_gate(register, k, step)
            register, n2 = _projected(register, mode.projector, n2, index, i, ratios)
        if rest > 0.0:
            register = apply_pair_gate(register, k, pair_propagator(spec, rest))
    return register, ratios


def run_schedule(register: QubitRegister, pairs: Sequence[PairSpec], schedule: ZenoSchedule) -> RunRecord:
    schedule.validate(register.num_pairs)
    specs = _spec_map(pairs, register.num_pairs)
    initial = norm_squared(register)
    logs = []
    for i, phase in enumerate(schedule.phases):
        register, ratios = run_phase(register, specs, phase, i)
        logs.append(PhaseLog(i, norm_squared(register) / initial, tuple(ratios)))
    n2 = norm_squared(register)
    if not n2 > 0.0:
        raise ZeroSurvivalError(len(schedule.phases) - 1, -1)
    return RunRecord(normalize(register), n2 / initial, tuple(logs))


def trace_schedule(register: QubitRegister, pairs: Sequence[PairSpec], schedule: ZenoSchedule, times):
    """States along a schedule at the requested times.

    Yields ``(t, normalized state, survival probability)`` for each time in
    ``times`` (sorted ascending).  The state at every phase boundary is
    checkpointed, so a sample only replays the prefix of its own phase.
    Inside a sliced phase, a sample reflects the slices completed by then.
    """
    schedule.validate(register.num_pairs)
    specs = _spec_map(pairs, register.num_pairs)
    initial = norm_squared(register)
    times = sorted(float(t) for t in times)
    start, checkpoint, i = 0.0, register, 0
    phases = list(enumerate(schedule.phases))
    for t in times:
        while i < len(phases) and t > start + phases[i][1].duration + 1e-12:
            checkpoint, _ = run_phase(checkpoint, specs, phases[i][1], i)
            start += phases[i][1].duration
            i += 1
        if i < len(phases):
            state, _ = run_phase(checkpoint, specs, phases[i][1], i, until=t - start)
        else:
            state = checkpoint
        n2 = norm_squared(state)
        if not n2 > 0.0:
            raise ZeroSurvivalError(min(i, len(phases) - 1), -1)
        yield t, normalize(state), n2 / initial
