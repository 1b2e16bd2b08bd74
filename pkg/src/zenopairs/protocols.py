"""Entanglement swap and transfer protocols, and their closed-form counterparts.

The closed forms below are written directly from amplitudes (no propagator or
projector calls) so that they stay independent of the simulator they check.
All closed forms assume omega = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .dynamics import PairSpec
from .metrics import concurrence_between
from .register import (A, QubitRegister, RegisterError, a, fidelity, new_register, prepare_superposition,
                       two_excitation_state)
from .zeno import (FREE, FROZEN, Free, Phase, Projector, RunRecord, SlicedZeno, ZenoSchedule,
                   run_schedule, trace_schedule)

HALF_PI = 0.5 * math.pi


# --- closed forms for the double Jaynes-Cummings system (M = 2) -------------

@dataclass(frozen=True)
class ClosedFormDJC:
    """Input (alpha|10> + beta|01>)_a |00>_A with pair 2 measured N times (A2 kept at 0).

    ``t = N * tau`` is the total time; pair 1 evolves freely throughout.
    """

    alpha: complex
    beta: complex
    g1: float
    g2: float
    tau: float
    N: int

    def __post_init__(self):
        n2 = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(n2 - 1.0) > 1e-12:
            raise ValueError(f"|alpha|^2 + |beta|^2 must be 1, got {n2!r}")
        if self.N < 0:
            raise ValueError(f"N must be >= 0, got {self.N}")

    @property
    def t(self) -> float:
        return self.N * self.tau

    @property
    def survival(self) -> float:
        """|alpha|^2 [1 - cos^2N(g2 tau)] + cos^2N(g2 tau)."""
        c2n = math.cos(self.g2 * self.tau) ** (2 * self.N)
        return abs(self.alpha) ** 2 * (1.0 - c2n) + c2n


def closed_form_state(p: ClosedFormDJC) -> QubitRegister:
    amps = np.zeros(16, dtype=np.complex128)
    g1t = p.g1 * p.t
    amps[0b0001] = p.alpha * math.cos(g1t)                       # |1_a1 0_a2>|00>
    amps[0b0010] = p.beta * math.cos(p.g2 * p.tau) ** p.N        # |0_a1 1_a2>|00>
    amps[0b0100] = -1j * p.alpha * math.sin(g1t)                 # |00>|1_A1 0_A2>
    return QubitRegister(2, amps / math.sqrt(p.survival))


def single_excitation_limit_state(alpha: complex, beta: complex, g1: float, g2: float, t1: float, t2: float) -> QubitRegister:
    """Input (alpha|10> + beta|01>)_a|00>_A after pair k rotated for t_k (frozen otherwise)."""
    amps = np.zeros(16, dtype=np.complex128)
    # bits: a1=0, a2=1, A1=2, A2=3
    amps[0b0001] = alpha * math.cos(g1 * t1)
    amps[0b0100] = -1j * alpha * math.sin(g1 * t1)
    amps[0b0010] = beta * math.cos(g2 * t2)
    amps[0b1000] = -1j * beta * math.sin(g2 * t2)
    return QubitRegister(2, amps)


def zeno_limit_state(alpha: complex, beta: complex, g1: float, t: float) -> QubitRegister:
    """N -> infinity limit: pair 2 frozen, pair 1 rotated for time t."""
    return single_excitation_limit_state(alpha, beta, g1, 0.0, t, 0.0)


def closed_form_concurrence(p: ClosedFormDJC) -> float:
    """C(a1, a2) after N measurements, defined only for g1 == g2."""
    if p.g1 != p.g2:
        raise ValueError("closed-form concurrence requires g1 == g2")
    g = p.g1
    cn = math.cos(g * p.tau) ** p.N
    num = 2.0 * abs(p.alpha * p.beta * math.cos(g * p.t) * cn)
    return num / (abs(p.alpha) ** 2 + abs(p.beta) ** 2 * cn * cn)


def zeno_limit_concurrence(alpha: complex, beta: complex, g: float, t: float) -> float:
    return 2.0 * abs(alpha * beta * math.cos(g * t))


def two_excitation_concurrence(alpha, beta, g, tau, N) -> float:
    """C(a1, a2) for the input (alpha|11> + beta|00>)_a |00>_A under the same control.

    The excited a2 branch now carries the cos^N factor, so the roles of alpha
    and beta swap in the normalization.
    """
    cn = math.cos(g * tau) ** N
    t = N * tau
    return 2.0 * abs(alpha * beta * math.cos(g * t) * cn) / (abs(beta) ** 2 + abs(alpha) ** 2 * cn * cn)


def two_excitation_limit_state(alpha, beta, g1, g2, t1, t2) -> QubitRegister:
    """Input (alpha|11> + beta|00>)_a|00>_A after pair k rotated for t_k (frozen otherwise)."""
    amps = np.zeros(16, dtype=np.complex128)
    c1, s1 = math.cos(g1 * t1), math.sin(g1 * t1)
    c2, s2 = math.cos(g2 * t2), math.sin(g2 * t2)
    # bits: a1=0, a2=1, A1=2, A2=3
    amps[0b0011] = alpha * c1 * c2
    amps[0b0110] = alpha * (-1j * s1) * c2
    amps[0b1001] = alpha * c1 * (-1j * s2)
    amps[0b1100] = alpha * (-1j * s1) * (-1j * s2)
    amps[0b0000] = beta
    return QubitRegister(2, amps)


def pulse_target(register: QubitRegister, pulse_times: Mapping[int, float], omega: float = 0.0) -> QubitRegister:
    """Exact result of a pi pulse on each listed pair, other pairs untouched.

    A pi pulse swaps the a_k and A_k bits; a singly excited pair picks up -i,
    while |00> and |11> pick up exp(+2i w t_k) and exp(-2i w t_k).
    """
    m = register.num_pairs
    src = register.amplitudes
    idx = np.arange(register.dim)
    dest = idx.copy()
    phase = np.ones(register.dim, dtype=np.complex128)
    for k, t in pulse_times.items():
        if not 1 <= k <= m:
            raise RegisterError(f"pair index {k} out of range [1, {m}]")
        ba, bA = a(k).bit(m), A(k).bit(m)
        xa, xA = (idx >> ba) & 1, (idx >> bA) & 1
        single = xa != xA
        dest = np.where(single, dest ^ ((1 << ba) | (1 << bA)), dest)
        phase = phase * np.where(single, -1j, np.where(xa == 1, np.exp(-2j * omega * t), np.exp(2j * omega * t)))
    out = np.zeros_like(src)
    out[dest] = src * phase
    return QubitRegister(m, out)


def six_term_output_state(c: Sequence[complex], explicit_phases: bool = True) -> QubitRegister:
    """Transferred eight-qubit state on the partition a3 a4 A1 A2, built term by term.

    ``explicit_phases=False`` reproduces the printed display literally
    (-c1, c2, c3, c4, c5, c6).  With ``explicit_phases=True`` the c2 and c3
    terms carry the -i each singly excited pair acquires in a pi pulse; the
    -c1 sign is the product of two such factors.
    """
    c1, c2, c3, c4, c5, c6 = c
    ph = -1j if explicit_phases else 1.0
    return prepare_superposition(new_register(4), [
        (-c1, ["a3", "a4", "A1", "A2"]),
        (c6, []),
        (ph * c2, ["A1"]),
        (ph * c3, ["A2"]),
        (c4, ["a3"]),
        (c5, ["a4"]),
    ])


# --- swap with unequal couplings ----------------------------------------

@dataclass(frozen=True)
class SwapPlan:
    """Freeze the faster pair for ``freeze_duration``, then let both evolve.

    ``slices=None`` freezes in the ideal limit; an integer uses that many
    measurements of A_fast during the freeze.
    """

    g1: float
    g2: float
    freeze_target: int
    freeze_duration: float
    total_duration: float
    slices: Optional[int] = None

    @property
    def slow_target(self) -> int:
        return 3 - self.freeze_target

    def freeze_mode(self):
        if self.slices is None:
            return FROZEN
        return SlicedZeno(Projector(A(self.freeze_target), 0), self.slices)

    def schedule(self) -> ZenoSchedule:
        phases = []
        if self.freeze_duration > 0:
            phases.append(Phase(self.freeze_duration, {self.freeze_target: self.freeze_mode(),
                                                       self.slow_target: FREE}))
        phases.append(Phase(self.total_duration - self.freeze_duration, {1: FREE, 2: FREE}))
        return ZenoSchedule(phases)

    def pairs(self, omega: float = 0.0) -> list:
        return [PairSpec(1, self.g1, omega), PairSpec(2, self.g2, omega)]


def plan_swap(g1: float, g2: float, N: Optional[int] = None) -> SwapPlan:
    if not (g1 > 0 and g2 > 0):
        raise ValueError(f"couplings must be positive, got g1={g1}, g2={g2}")
    if N is not None and N < 1:
        raise ValueError(f"slice count must be >= 1, got {N}")
    g_slow, g_fast = min(g1, g2), max(g1, g2)
    fast = 2 if g2 > g1 else 1
    total = HALF_PI / g_slow
    freeze = HALF_PI * (1.0 / g_slow - 1.0 / g_fast)
    return SwapPlan(g1, g2, fast, freeze, total, N)


def run_swap(register: QubitRegister, plan: SwapPlan, omega: float = 0.0) -> RunRecord:
    if register.num_pairs != 2:
        raise RegisterError(f"swap acts on two pairs, register has {register.num_pairs}")
    return run_schedule(register, plan.pairs(omega), plan.schedule())


def swap_target(register: QubitRegister, plan: SwapPlan, omega: float = 0.0) -> QubitRegister:
    """Ideal outcome of ``plan``: both pairs pi-pulsed, with phases explicit."""
    return pulse_target(register, {plan.freeze_target: plan.total_duration - plan.freeze_duration,
                                   plan.slow_target: plan.total_duration}, omega)


# --- partition-to-partition transfer ----------------------------------------

@dataclass(frozen=True)
class TransferPlan:
    num_pairs: int
    active_pairs: frozenset
    frozen_pairs: frozenset
    couplings: tuple          # g_k for k = 1..M
    pulse_duration: float
    slices: Optional[int] = None

    def schedule(self) -> ZenoSchedule:
        modes = {k: FREE for k in self.active_pairs}
        for k in self.frozen_pairs:
            modes[k] = FROZEN if self.slices is None else SlicedZeno(Projector(A(k), 0), self.slices)
        return ZenoSchedule([Phase(self.pulse_duration, modes)])

    def pairs(self, omega: float = 0.0) -> list:
        return [PairSpec(k, g, omega) for k, g in enumerate(self.couplings, start=1)]


def plan_transfer(num_pairs: int, active_pairs: Iterable[int],
                  g: Union[float, Sequence[float]], N: Optional[int] = None) -> TransferPlan:
    """One pi pulse on ``active_pairs`` while every other pair is held by Zeno control.

    ``g`` is either one coupling for all pairs or a per-pair sequence; the
    active pairs must share a single value.
    """
    active = frozenset(int(k) for k in active_pairs)
    everything = frozenset(range(1, num_pairs + 1))
    if not active:
        raise ValueError("at least one active pair is required")
    if not active <= everything:
        raise ValueError(f"active pairs {sorted(active - everything)} not in [1, {num_pairs}]")
    couplings = (float(g),) * num_pairs if np.isscalar(g) else tuple(float(x) for x in g)
    if len(couplings) != num_pairs:
        raise ValueError(f"expected {num_pairs} couplings, got {len(couplings)}")
    g_active = {couplings[k - 1] for k in active}
    if len(g_active) != 1:
        raise ValueError(f"active pairs must share one coupling, got {sorted(g_active)}")
    g0 = g_active.pop()
    if not g0 > 0:
        raise ValueError(f"active coupling must be positive, got {g0}")
    if N is not None and N < 1:
        raise ValueError(f"slice count must be >= 1, got {N}")
    return TransferPlan(num_pairs, active, everything - active, couplings, HALF_PI / g0, N)


def run_transfer(register: QubitRegister, plan: TransferPlan, omega: float = 0.0) -> RunRecord:
    if register.num_pairs != plan.num_pairs:
        raise RegisterError(f"plan is for {plan.num_pairs} pairs, register has {register.num_pairs}")
    return run_schedule(register, plan.pairs(omega), plan.schedule())


def transfer_target(register: QubitRegister, plan: TransferPlan, omega: float = 0.0) -> QubitRegister:
    return pulse_target(register, {k: plan.pulse_duration for k in plan.active_pairs}, omega)


# --- the two-excitation input --------------------------------------------

@dataclass(frozen=True)
class AlternateInputReport:
    times: tuple
    concurrence_a: tuple          # C(a1, a2)
    concurrence_A: tuple          # C(A1, A2)
    survival: tuple
    closed_form_a: Optional[tuple]
    limit_fidelity: float         # final state vs the ideal-freeze limit


def verify_alternate_input(alpha: complex, beta: complex, schedule: ZenoSchedule,
                           couplings=(1.0, 1.0), samples: int = 41) -> AlternateInputReport:
    """Run ``schedule`` on (alpha|11> + beta|00>)_a|00>_A and collect concurrence traces.

    ``closed_form_a`` is filled when the schedule is a single phase with pair 1
    free and pair 2 sliced, and g1 == g2: the analogue of the one-excitation
    closed form with the normalization roles of alpha and beta exchanged.
    """
    pairs = [PairSpec(1, couplings[0]), PairSpec(2, couplings[1])]
    psi0 = two_excitation_state(alpha, beta)
    total = schedule.total_duration
    times = np.linspace(0.0, total, samples) if samples > 1 else np.array([total])
    ca, cA, surv, cf = [], [], [], []
    single = (len(schedule.phases) == 1 and isinstance(schedule.phases[0].mode(1), Free)
              and isinstance(schedule.phases[0].mode(2), SlicedZeno) and couplings[0] == couplings[1])
    final = None
    for t, state, s in trace_schedule(psi0, pairs, schedule, times):
        ca.append(concurrence_between(state, "a1", "a2"))
        cA.append(concurrence_between(state, "A1", "A2"))
        surv.append(s)
        final = state
        if single:
            n = schedule.phases[0].mode(2).slices
            tau = total / n
            done = min(n, int(math.floor(t / tau + 1e-9))) if tau > 0 else n
            # samples off the slice grid include an unmeasured remainder
            cf.append(two_excitation_concurrence(alpha, beta, couplings[0], tau, done)
                      if abs(done * tau - t) < 1e-12 else float("nan"))
    limit = two_excitation_limit_state(alpha, beta, couplings[0], couplings[1],
                                       schedule.free_time(1), schedule.free_time(2))
    return AlternateInputReport(tuple(float(t) for t in times), tuple(ca), tuple(cA), tuple(surv),
                                tuple(cf) if single else None, fidelity(final, limit))
