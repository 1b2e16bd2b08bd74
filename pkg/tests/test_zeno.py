import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zenopairs.dynamics import PairSpec, pair_propagator
from zenopairs.metrics import reduce_to, reduce_to_pair, state_fidelity
from zenopairs.protocols import ClosedFormDJC, zeno_limit_state
from zenopairs.register import (A, QubitRegister, RegisterError, a, single_excitation_state, fidelity, new_register, norm_squared,
                                prepare_superposition, random_register)
from zenopairs.zeno import (FREE, FROZEN, Phase, Projector, SlicedZeno, ZenoSchedule, ZeroSurvivalError,
                            project, run_schedule, trace_schedule, zeno_evolve_pair)

S = 1 / math.sqrt(2)
KEEP_A2 = Projector(A(2), 0)


def dense_pair_operator(m, k, mat):
    """Full-register matrix of a pair operator, built index by index."""
    ba, bA = a(k).bit(m), A(k).bit(m)
    dim = 1 << (2 * m)
    full = np.zeros((dim, dim), complex)
    for b in range(dim):
        col = 2 * ((b >> ba) & 1) + ((b >> bA) & 1)
        base = b & ~((1 << ba) | (1 << bA))
        for row in range(4):
            full[base | ((row >> 1) << ba) | ((row & 1) << bA), b] += mat[row, col]
    return full


def dense_projector(m, p):
    bit = p.target.bit(m)
    return np.diag([1.0 if ((b >> bit) & 1) == p.kept_value else 0.0 for b in range(1 << (2 * m))])


def test_project_vacuum_unchanged():
    out, n2 = project(new_register(2), KEEP_A2)
    np.testing.assert_array_equal(out.amplitudes, new_register(2).amplitudes)
    assert n2 == 1.0


def test_project_orthogonal_state():
    s = prepare_superposition(new_register(2), [(1, ["A2"])])
    out, n2 = project(s, KEEP_A2)
    assert n2 == 0.0
    assert not np.any(out.amplitudes)


def test_project_matches_dense_projector(rng):
    for q in ("a1", "A1", "a3", "A3"):
        for kept in (0, 1):
            p = Projector(q, kept)
            s = random_register(3, rng)
            out, n2 = project(s, p)
            ref = dense_projector(3, p) @ s.amplitudes
            np.testing.assert_array_equal(out.amplitudes, ref)
            assert n2 == pytest.approx(np.vdot(ref, ref).real, abs=1e-15)


def test_project_does_not_renormalize():
    out, n2 = project(single_excitation_state(S, S), Projector("a1", 1))
    assert n2 == pytest.approx(0.5)
    assert norm_squared(out) == pytest.approx(0.5)


def test_projector_validation():
    with pytest.raises(ValueError):
        Projector("A1", 2)
    with pytest.raises(ValueError):
        SlicedZeno(KEEP_A2, 0)


def test_one_slice_by_hand():
    al, be, g2, tau = 0.6, 0.8, 1.0, 0.3
    s = single_excitation_state(al, be)
    from zenopairs.dynamics import apply_pair_gate
    s = apply_pair_gate(s, 2, pair_propagator(PairSpec(2, g2), tau))
    out, n2 = project(s, KEEP_A2)
    assert out.amplitude(["a2"]) == pytest.approx(be * math.cos(g2 * tau), abs=1e-15)
    assert out.amplitude(["A2"]) == 0
    assert n2 == pytest.approx(be**2 * math.cos(g2 * tau) ** 2 + al**2, abs=1e-15)


def test_zeno_trivial_run():
    s = single_excitation_state(S, S)
    rec = zeno_evolve_pair(s, [PairSpec(1, 1.0), PairSpec(2, 1.0)], 2, KEEP_A2, 0.0, 1)
    np.testing.assert_allclose(rec.final_state.amplitudes, s.amplitudes, atol=1e-15)
    assert rec.survival_probability == pytest.approx(1.0, abs=1e-15)


def test_zeno_n64_keeps_pair2():
    s = single_excitation_state(S, S)
    rec = zeno_evolve_pair(s, [PairSpec(1, 1.0), PairSpec(2, 1.0)], 2, KEEP_A2, math.pi / 2, 64)
    f = state_fidelity(reduce_to_pair(s, "a2", "A2"), reduce_to_pair(rec.final_state, "a2", "A2"))
    assert f >= 0.98
    assert rec.survival_probability >= 0.98


def test_zeno_n4096_approaches_limit():
    pairs = [PairSpec(1, 1.0), PairSpec(2, 1.0)]
    rec = zeno_evolve_pair(single_excitation_state(S, S), pairs, 2, KEEP_A2, math.pi / 2, 4096)
    assert fidelity(rec.final_state, zeno_limit_state(S, S, 1.0, math.pi / 2)) >= 1 - 1e-3


def test_zeno_argument_checks():
    pairs = [PairSpec(1, 1.0), PairSpec(2, 1.0)]
    with pytest.raises(ValueError):
        zeno_evolve_pair(single_excitation_state(S, S), pairs, 2, KEEP_A2, 1.0, 0)
    with pytest.raises(ValueError):
        zeno_evolve_pair(single_excitation_state(S, S), pairs, 1, KEEP_A2, 1.0, 4)
    with pytest.raises(RegisterError):
        zeno_evolve_pair(single_excitation_state(S, S), pairs, 3, Projector("A3"), 1.0, 4)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 20), st.floats(0.01, 3), st.floats(0.1, 2), st.floats(0.1, 2))
def test_survival_is_unnormalized_norm(seed, n, T, g1, g2):
    """(P U(T/N))^N psi with dense matrices, never renormalized."""
    s = random_register(2, np.random.default_rng(seed))
    pairs = [PairSpec(1, g1, 0.2), PairSpec(2, g2, -0.3)]
    rec = zeno_evolve_pair(s, pairs, 2, KEEP_A2, T, n)
    step = (dense_pair_operator(2, 1, pair_propagator(pairs[0], T / n).matrix)
            @ dense_pair_operator(2, 2, pair_propagator(pairs[1], T / n).matrix))
    proj = dense_projector(2, KEEP_A2)
    v = s.amplitudes
    for _ in range(n):
        v = proj @ (step @ v)
    expected = np.vdot(v, v).real
    assert rec.survival_probability == pytest.approx(expected, rel=1e-12, abs=1e-15)
    assert rec.slice_ratio_product() == pytest.approx(rec.survival_probability, rel=1e-12)
    np.testing.assert_allclose(rec.final_state.amplitudes, v / math.sqrt(expected), atol=1e-10)


@pytest.mark.parametrize("n", [1, 3, 16, 100])
@pytest.mark.parametrize("al", [0.2, S, 0.95])
def test_survival_closed_form(n, al):
    be = math.sqrt(1 - al**2)
    g2tau = 0.37
    rec = zeno_evolve_pair(single_excitation_state(al, be), [PairSpec(1, 0.8), PairSpec(2, 1.0)], 2, KEEP_A2, n * g2tau, n)
    c2n = math.cos(g2tau) ** (2 * n)
    assert rec.survival_probability == pytest.approx(al**2 * (1 - c2n) + c2n, abs=1e-10)


def test_survival_tends_to_one():
    rec = zeno_evolve_pair(single_excitation_state(S, S), [PairSpec(1, 1.0), PairSpec(2, 1.0)], 2, KEEP_A2, math.pi / 2, 4096)
    assert rec.survival_probability >= 1 - 2e-3


def test_deficit_scaling_laws():
    """Measured convergence: survival loss ~ 1/N, fidelity loss to the frozen limit ~ 1/N**2."""
    pairs = [PairSpec(1, 1.0), PairSpec(2, 1.0)]
    limit = zeno_limit_state(S, S, 1.0, 1.0)
    fid, surv = {}, {}
    for n in (256, 512):
        rec = zeno_evolve_pair(single_excitation_state(S, S), pairs, 2, KEEP_A2, 1.0, n)
        fid[n] = 1 - fidelity(rec.final_state, limit)
        surv[n] = 1 - rec.survival_probability
    assert 1.7 <= surv[256] / surv[512] <= 2.3
    assert 3.8 <= fid[256] / fid[512] <= 4.2


def test_fidelity_deficit_decreases_with_n():
    pairs = [PairSpec(1, 1.0), PairSpec(2, 1.0)]
    limit = zeno_limit_state(S, S, 1.0, 1.0)
    deficits = [1 - fidelity(zeno_evolve_pair(single_excitation_state(S, S), pairs, 2, KEEP_A2, 1.0, n).final_state, limit)
                for n in (1, 2, 4, 8, 16, 32, 64)]
    assert all(x > y for x, y in zip(deficits, deficits[1:]))


def test_empty_schedule():
    s = single_excitation_state(S, S)
    rec = run_schedule(s, [PairSpec(1, 1.0), PairSpec(2, 2.0)], ZenoSchedule())
    np.testing.assert_array_equal(rec.final_state.amplitudes, s.amplitudes)
    assert rec.survival_probability == 1.0


def test_all_frozen_schedule(rng):
    s = random_register(3, rng)
    sched = ZenoSchedule([Phase(7.3, {1: FROZEN, 2: FROZEN, 3: FROZEN})])
    rec = run_schedule(s, [PairSpec(k, 1.0 + k, 0.4) for k in (1, 2, 3)], sched)
    np.testing.assert_array_equal(rec.final_state.amplitudes, s.amplitudes)


def test_schedule_matches_zeno_evolve_pair(rng):
    s = random_register(2, rng)
    pairs = [PairSpec(1, 0.9, 0.3), PairSpec(2, 1.4, 0.1)]
    rec1 = zeno_evolve_pair(s, pairs, 2, KEEP_A2, 1.3, 37)
    rec2 = run_schedule(s, pairs, ZenoSchedule([Phase(1.3, {2: SlicedZeno(KEEP_A2, 37)})]))
    assert fidelity(rec1.final_state, rec2.final_state) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(rec1.final_state.amplitudes, rec2.final_state.amplitudes, atol=1e-12)
    assert rec1.survival_probability == pytest.approx(rec2.survival_probability, rel=1e-12)


def test_schedule_survival_product(rng):
    s = random_register(3, rng)
    sched = ZenoSchedule([
        Phase(0.4, {1: SlicedZeno(Projector("A1"), 5), 2: FROZEN}),
        Phase(0.9, {2: SlicedZeno(Projector("a2", 1), 3), 3: SlicedZeno(Projector("A3"), 8)}),
    ])
    rec = run_schedule(s, [PairSpec(k, 0.5 * k, 0.1) for k in (1, 2, 3)], sched)
    assert rec.slice_ratio_product() == pytest.approx(rec.survival_probability, rel=1e-12)
    assert len(rec.per_phase_log[0].slice_ratios) == 5
    assert len(rec.per_phase_log[1].slice_ratios) == 11
    assert rec.per_phase_log[-1].norm_squared == pytest.approx(rec.survival_probability, rel=1e-12)


def test_zero_survival_reports_location():
    s = prepare_superposition(new_register(2), [(1, ["A2"])])
    sched = ZenoSchedule([Phase(0.5, {}), Phase(0.0, {2: SlicedZeno(KEEP_A2, 3)})])
    with pytest.raises(ZeroSurvivalError) as err:
        run_schedule(s, [PairSpec(1, 1.0), PairSpec(2, 0.0)], sched)
    assert err.value.phase == 1 and err.value.slice_index == 0


def test_schedule_validation():
    pairs = [PairSpec(1, 1.0), PairSpec(2, 1.0)]
    with pytest.raises(ValueError):
        run_schedule(new_register(2), pairs, ZenoSchedule([Phase(-1.0, {})]))
    with pytest.raises(ValueError):
        run_schedule(new_register(2), pairs, ZenoSchedule([Phase(1.0, {3: FREE})]))
    with pytest.raises(ValueError):
        run_schedule(new_register(2), pairs, ZenoSchedule([Phase(1.0, {1: SlicedZeno(KEEP_A2, 2)})]))
    with pytest.raises(ValueError):
        run_schedule(new_register(2), pairs[:1], ZenoSchedule([Phase(1.0, {})]))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 4), st.integers(1, 3))
def test_freezing_leaves_other_pairs_alone(seed, t, j):
    rng = np.random.default_rng(seed)
    s = random_register(3, rng)
    pairs = [PairSpec(k, rng.uniform(0.2, 2), rng.uniform(-1, 1)) for k in (1, 2, 3)]
    free = run_schedule(s, pairs, ZenoSchedule([Phase(t, {})])).final_state
    frozen = run_schedule(s, pairs, ZenoSchedule([Phase(t, {j: FROZEN})])).final_state
    others = [q for k in (1, 2, 3) if k != j for q in (f"a{k}", f"A{k}")]
    np.testing.assert_allclose(reduce_to(free, others), reduce_to(frozen, others), atol=1e-12)


def test_measuring_product_pair_leaves_other_pairs_alone(rng):
    # pair 2 starts unentangled with the rest, so post-selection on it cannot steer pairs 1 and 3
    rest = random_register(2, rng).amplitudes.reshape(2, 2, 2, 2)     # bits A3 A1 a3 a1 after relabel below
    amps = np.zeros((2,) * 6, complex)
    # register bits (msb..lsb): A3 A2 A1 a3 a2 a1; pair 2 in |1_a2 0_A2>
    amps[:, 0, :, :, 1, :] = rest
    s = QubitRegister(3, amps.reshape(-1))
    pairs = [PairSpec(1, 0.7), PairSpec(2, 1.3), PairSpec(3, 1.9)]
    free = run_schedule(s, pairs, ZenoSchedule([Phase(1.1, {})])).final_state
    meas = run_schedule(s, pairs, ZenoSchedule([Phase(1.1, {2: SlicedZeno(KEEP_A2, 9)})])).final_state
    others = ["a1", "A1", "a3", "A3"]
    np.testing.assert_allclose(reduce_to(free, others), reduce_to(meas, others), atol=1e-12)


def test_trace_endpoints_and_boundaries(rng):
    s = random_register(2, rng)
    pairs = [PairSpec(1, 1.0, 0.2), PairSpec(2, 2.0)]
    sched = ZenoSchedule([Phase(0.5, {2: SlicedZeno(KEEP_A2, 10)}), Phase(0.7, {1: FROZEN})])
    samples = list(trace_schedule(s, pairs, sched, [0.0, 0.5, 0.75, 1.2]))
    np.testing.assert_allclose(samples[0][1].amplitudes, s.amplitudes, atol=1e-15)
    first = run_schedule(s, pairs, ZenoSchedule(sched.phases[:1]))
    assert fidelity(samples[1][1], first.final_state) == pytest.approx(1.0, abs=1e-12)
    assert samples[1][2] == pytest.approx(first.survival_probability, rel=1e-12)
    full = run_schedule(s, pairs, sched)
    assert fidelity(samples[-1][1], full.final_state) == pytest.approx(1.0, abs=1e-12)
    partial = run_schedule(s, pairs, ZenoSchedule([sched.phases[0], Phase(0.25, {1: FROZEN})]))
    assert fidelity(samples[2][1], partial.final_state) == pytest.approx(1.0, abs=1e-12)


def test_trace_inside_sliced_phase_counts_completed_slices():
    pairs = [PairSpec(1, 1.0), PairSpec(2, 1.0)]
    sched = ZenoSchedule([Phase(0.8, {2: SlicedZeno(KEEP_A2, 4)})])
    (_, state, surv), = trace_schedule(single_excitation_state(S, S), pairs, sched, [0.4])
    p = ClosedFormDJC(S, S, 1.0, 1.0, 0.2, 2)
    assert surv == pytest.approx(p.survival, abs=1e-12)
