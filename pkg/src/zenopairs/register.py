"""Dense state vectors for 2M qubits arranged as M exchange-coupled pairs.

Qubits are labelled ``a1..aM`` (lower) and ``A1..AM`` (upper).  Basis index
``b`` has qubit ``q`` excited iff bit ``q.bit(M)`` of ``b`` is set, with

    bit(a_k) = k - 1
    bit(A_k) = M + k - 1

so the a-partition lives in the low bits and pair ``k`` is addressed by the
two bit positions ``k-1`` and ``M+k-1``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_PAIRS = 13
NORM_TOL = 1e-12


class RegisterError(ValueError):
    pass


class ZeroNormError(RegisterError):
    """Raised when normalizing a state whose norm vanished."""


class Role(enum.Enum):
    LOWER = "a"
    UPPER = "A"


_QUBIT_RE = re.compile(r"^\s*([aA])\s*_?\s*(\d+)\s*$")


@dataclass(frozen=True, order=True)
class QubitId:
    role: Role
    pair: int

    def __post_init__(self):
        if self.pair < 1:
            raise RegisterError(f"pair index must be >= 1, got {self.pair}")

    @classmethod
    def parse(cls, text: str) -> "QubitId":
        """Parse labels such as ``"a1"``, ``"A2"`` or ``"A_3"``."""
        m = _QUBIT_RE.match(text)
        if m is None:
            raise RegisterError(f"not a qubit label: {text!r}")
        return cls(Role(m.group(1)), int(m.group(2)))

    def bit(self, num_pairs: int) -> int:
        if self.pair > num_pairs:
            raise RegisterError(f"{self} does not exist in a register with {num_pairs} pairs")
        if self.role is Role.LOWER:
            return self.pair - 1
        return num_pairs + self.pair - 1

    def __str__(self):
        return f"{self.role.value}{self.pair}"


def a(k: int) -> QubitId:
    return QubitId(Role.LOWER, k)


def A(k: int) -> QubitId:
    return QubitId(Role.UPPER, k)


def as_qubit(q) -> QubitId:
    if isinstance(q, QubitId):
        return q
    return QubitId.parse(q)


def all_qubits(num_pairs: int) -> list[QubitId]:
    return [a(k) for k in range(1, num_pairs + 1)] + [A(k) for k in range(1, num_pairs + 1)]


def _check_num_pairs(num_pairs: int):
    if not isinstance(num_pairs, (int, np.integer)) or not 1 <= num_pairs <= MAX_PAIRS:
        raise RegisterError(f"num_pairs must be an integer in [1, {MAX_PAIRS}], got {num_pairs!r}")


@dataclass(frozen=True)
class BasisStateSpec:
    """A computational basis state given by its excited qubits.

    ``occupation`` maps every qubit of the register to 0 or 1.  Use
    :meth:`excited` for the common case of naming only the excited qubits.
    """

    occupation: Mapping[QubitId, int]

    @classmethod
    def excited(cls, num_pairs: int, qubits: Iterable = ()) -> "BasisStateSpec":
        on = {as_qubit(q) for q in qubits}
        occ = {q: int(q in on) for q in all_qubits(num_pairs)}
        stray = on - set(occ)
        if stray:
            raise RegisterError(f"qubits {sorted(map(str, stray))} not in a {num_pairs}-pair register")
        return cls(occ)

    def index(self, num_pairs: int) -> int:
        expected = set(all_qubits(num_pairs))
        got = set(self.occupation)
        if got != expected:
            missing = sorted(map(str, expected - got))
            extra = sorted(map(str, got - expected))
            raise RegisterError(f"basis spec must list every qubit once (missing={missing}, extra={extra})")
        b = 0
        for q, v in self.occupation.items():
            if v not in (0, 1):
                raise RegisterError(f"occupation of {q} must be 0 or 1, got {v!r}")
            if v:
                b |= 1 << q.bit(num_pairs)
        return b


class QubitRegister:
    """Amplitude vector of length ``2**(2M)``.

    Operations in this package never mutate a register in place; they return
    a new one.  ``amplitudes`` is exposed read-only.
    """

    __slots__ = ("num_pairs", "_amps")

    def __init__(self, num_pairs: int, amplitudes=None):
        _check_num_pairs(num_pairs)
        dim = 1 << (2 * num_pairs)
        if amplitudes is None:
            amps = np.zeros(dim, dtype=np.complex128)
            amps[0] = 1.0
        else:
            amps = np.array(amplitudes, dtype=np.complex128).reshape(-1)
            if amps.shape[0] != dim:
                raise RegisterError(f"expected {dim} amplitudes for {num_pairs} pairs, got {amps.shape[0]}")
        amps.setflags(write=False)
        self.num_pairs = int(num_pairs)
        self._amps = amps

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amps

    @property
    def num_qubits(self) -> int:
        return 2 * self.num_pairs

    @property
    def dim(self) -> int:
        return self._amps.shape[0]

    def with_amplitudes(self, amps) -> "QubitRegister":
        return QubitRegister(self.num_pairs, amps)

    def amplitude(self, excited: Iterable = ()) -> complex:
        return complex(self._amps[BasisStateSpec.excited(self.num_pairs, excited).index(self.num_pairs)])

    def __repr__(self):
        return f"QubitRegister(num_pairs={self.num_pairs}, norm2={norm_squared(self):.6g})"


def new_register(num_pairs: int) -> QubitRegister:
    return QubitRegister(num_pairs)


def flip_bit(index: int, q: QubitId, num_pairs: int) -> int:
    return index ^ (1 << q.bit(num_pairs))


def prepare_superposition(register: QubitRegister, terms: Sequence) -> QubitRegister:
    """Normalized superposition of basis states.

    ``terms`` is a sequence of ``(coefficient, state)`` where ``state`` is a
    :class:`BasisStateSpec` or an iterable of excited qubit labels.
    Repeated basis states have their coefficients summed.
    """
    if len(terms) == 0:
        raise RegisterError("at least one term is required")
    m = register.num_pairs
    amps = np.zeros(register.dim, dtype=np.complex128)
    for coeff, state in terms:
        if not isinstance(state, BasisStateSpec):
            state = BasisStateSpec.excited(m, state)
        amps[state.index(m)] += complex(coeff)
    n2 = float(np.vdot(amps, amps).real)
    if n2 == 0.0:
        raise RegisterError("superposition has zero norm (all coefficients cancel or vanish)")
    return QubitRegister(m, amps / np.sqrt(n2))


def norm_squared(register: QubitRegister) -> float:
    amps = register.amplitudes
    return float(np.vdot(amps, amps).real)


def normalize(register: QubitRegister) -> QubitRegister:
    n2 = norm_squared(register)
    if n2 <= 0.0:
        raise ZeroNormError("cannot normalize a zero-norm state")
    return register.with_amplitudes(register.amplitudes / np.sqrt(n2))


def fidelity(x: QubitRegister, y: QubitRegister) -> float:
    """|<x|y>|^2 for two normalized registers."""
    if x.num_pairs != y.num_pairs:
        raise RegisterError(f"dimension mismatch: {x.num_pairs} vs {y.num_pairs} pairs")
    f = abs(np.vdot(x.amplitudes, y.amplitudes)) ** 2
    return float(min(f, 1.0))


def random_register(num_pairs: int, rng: np.random.Generator) -> QubitRegister:
    dim = 1 << (2 * num_pairs)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return normalize(QubitRegister(num_pairs, v))


# --- named initial states --------------------------------------------------

def single_excitation_state(alpha: complex, beta: complex) -> QubitRegister:
    """(alpha|1_a1 0_a2> + beta|0_a1 1_a2>)|0_A1 0_A2>."""
    return prepare_superposition(new_register(2), [(alpha, ["a1"]), (beta, ["a2"])])


def two_excitation_state(alpha: complex, beta: complex) -> QubitRegister:
    """(alpha|1_a1 1_a2> + beta|0_a1 0_a2>)|0_A1 0_A2>."""
    return prepare_superposition(new_register(2), [(alpha, ["a1", "a2"]), (beta, [])])


def w_state(num_pairs: int) -> QubitRegister:
    """Equal superposition of a single excitation over the a-partition."""
    return prepare_superposition(new_register(num_pairs), [(1.0, [a(k)]) for k in range(1, num_pairs + 1)])


def six_term_state(c: Sequence[complex]) -> QubitRegister:
    """Eight-qubit input (|phi+> + |psi>)|0000>_A built from c1..c6.

    |phi+> = c1|1111> + c6|0000> and |psi> = c2|1000> + c3|0100> + c4|0010>
    + c5|0001> on a1..a4.  The coefficients are normalized at preparation.
    """
    if len(c) != 6:
        raise RegisterError(f"expected six coefficients c1..c6, got {len(c)}")
    c1, c2, c3, c4, c5, c6 = c
    return prepare_superposition(new_register(4), [
        (c1, ["a1", "a2", "a3", "a4"]),
        (c6, []),
        (c2, ["a1"]),
        (c3, ["a2"]),
        (c4, ["a3"]),
        (c5, ["a4"]),
    ])
