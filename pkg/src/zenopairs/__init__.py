"""Zeno-controlled entanglement dynamics of 2M pairwise-coupled qubits."""

__version__ = "0.1.0"

from .register import (A, BasisStateSpec, QubitId, QubitRegister, RegisterError, Role, ZeroNormError, a,
                       single_excitation_state, fidelity, new_register, norm_squared, normalize, prepare_superposition,
                       six_term_state, two_excitation_state, w_state)
from .dynamics import (PairPropagator, PairSpec, apply_pair_gate, dense_evolve, dense_hamiltonian,
                       evolve_free, pair_propagator)
from .zeno import (FREE, FROZEN, Free, IdealFrozen, Phase, Projector, RunRecord, SlicedZeno,
                   ZenoSchedule, ZeroSurvivalError, project, run_schedule, trace_schedule, zeno_evolve_pair)
from .metrics import (concurrence, concurrence_between, excitation_expectation, excitation_of,
                      reduce_to_pair)
from .protocols import (ClosedFormDJC, SwapPlan, TransferPlan, closed_form_concurrence, closed_form_state,
                        plan_swap, plan_transfer, run_swap, run_transfer, swap_target, transfer_target,
                        verify_alternate_input, zeno_limit_state)
