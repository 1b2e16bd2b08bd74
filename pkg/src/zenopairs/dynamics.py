"""Free evolution of independent exchange-coupled pairs.

Each pair ``(a_k, A_k)`` evolves under

    H_k = w sz(a_k) + w sz(A_k) + g_k (s-(a_k) s+(A_k) + s+(a_k) s-(A_k))

with hbar = 1 and sz|1> = +|1>, sz|0> = -|0>.  The pair terms commute, so the
global propagator is a product of 4x4 pair propagators.  ``dense_*`` build the
same evolution from the full Hamiltonian as a brute-force cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .register import A, QubitRegister, RegisterError, a

MAX_DENSE_PAIRS = 4


@dataclass(frozen=True)
class PairSpec:
    k: int
    g: float
    omega: float = 0.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"pair index must be >= 1, got {self.k}")
        if not (math.isfinite(self.g) and math.isfinite(self.omega)):
            raise ValueError(f"pair {self.k}: couplings must be finite (g={self.g}, omega={self.omega})")
        if self.g < 0:
            raise ValueError(f"pair {self.k}: coupling g must be >= 0, got {self.g}")


@dataclass(frozen=True)
class PairPropagator:
    """4x4 unitary over the pair basis (|00>, |01>, |10>, |11>), slot order (a_k, A_k)."""

    matrix: np.ndarray
    t: float

    @classmethod
    def identity(cls) -> "PairPropagator":
        return cls(np.eye(4, dtype=np.complex128), 0.0)


def pair_propagator(spec: PairSpec, t: float) -> PairPropagator:
    if not math.isfinite(t):
        raise ValueError(f"duration must be finite, got {t}")
    c, s = math.cos(spec.g * t), math.sin(spec.g * t)
    u = np.zeros((4, 4), dtype=np.complex128)
    u[0, 0] = np.exp(2j * spec.omega * t)
    u[1, 1] = c
    u[2, 2] = c
    u[1, 2] = -1j * s
    u[2, 1] = -1j * s
    u[3, 3] = np.exp(-2j * spec.omega * t)
    return PairPropagator(u, float(t))


def apply_pair_gate(register: QubitRegister, k: int, U) -> QubitRegister:
    """Apply a 4x4 operator to the bits of pair ``k``; identity elsewhere.

    ``U`` may be a :class:`PairPropagator` or any 4x4 array (projectors are
    applied through the same kernel).
    """
    m = register.num_pairs
    if not 1 <= k <= m:
        raise RegisterError(f"pair index {k} out of range [1, {m}]")
    mat = U.matrix if isinstance(U, PairPropagator) else np.asarray(U, dtype=np.complex128)
    n = 2 * m
    # C-order reshape puts the most significant bit on axis 0
    ax_a = n - 1 - a(k).bit(m)
    ax_A = n - 1 - A(k).bit(m)
    psi = register.amplitudes.reshape((2,) * n)
    out = np.tensordot(mat.reshape(2, 2, 2, 2), psi, axes=([2, 3], [ax_a, ax_A]))
    out = np.moveaxis(out, [0, 1], [ax_a, ax_A])
    return register.with_amplitudes(out.reshape(-1))


def _check_pairs(pairs: Sequence[PairSpec], num_pairs: int):
    seen = set()
    for p in pairs:
        if p.k in seen:
            raise ValueError(f"pair {p.k} listed more than once")
        if p.k > num_pairs:
            raise RegisterError(f"pair index {p.k} out of range [1, {num_pairs}]")
        seen.add(p.k)


def evolve_free(register: QubitRegister, pairs: Sequence[PairSpec], t: float) -> QubitRegister:
    """Evolve every listed pair for time ``t``.  Unlisted pairs are left untouched."""
    _check_pairs(pairs, register.num_pairs)
    for p in pairs:
        register = apply_pair_gate(register, p.k, pair_propagator(p, t))
    return register


# --- brute-force oracle ----------------------------------------------------

_SZ = np.diag([-1.0, 1.0]).astype(np.complex128)
_SP = np.array([[0, 0], [1, 0]], dtype=np.complex128)  # |1><0|
_SM = _SP.T.copy()
_I2 = np.eye(2, dtype=np.complex128)


def _embed(ops: dict, n: int) -> np.ndarray:
    # first kron factor is the most significant bit
    out = np.ones((1, 1), dtype=np.complex128)
    for bit in range(n - 1, -1, -1):
        out = np.kron(out, ops.get(bit, _I2))
    return out


def dense_hamiltonian(pairs: Sequence[PairSpec], num_pairs: int) -> np.ndarray:
    if num_pairs > MAX_DENSE_PAIRS:
        raise ValueError(f"dense oracle limited to {MAX_DENSE_PAIRS} pairs, got {num_pairs}")
    _check_pairs(pairs, num_pairs)
    n = 2 * num_pairs
    h = np.zeros((1 << n, 1 << n), dtype=np.complex128)
    for p in pairs:
        ba, bA = a(p.k).bit(num_pairs), A(p.k).bit(num_pairs)
        h += p.omega * (_embed({ba: _SZ}, n) + _embed({bA: _SZ}, n))
        h += p.g * (_embed({ba: _SM, bA: _SP}, n) + _embed({ba: _SP, bA: _SM}, n))
    return h


def expm_taylor(mat: np.ndarray, tol: float = 1e-16) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a truncated Taylor series."""
    mat = np.asarray(mat, dtype=np.complex128)
    norm = np.linalg.norm(mat, 1)
    squarings = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0 else 0
    x = mat / (1 << squarings)
    result = np.eye(mat.shape[0], dtype=np.complex128)
    term = result.copy()
    for j in range(1, 60):
        term = term @ x / j
        result = result + term
        if np.linalg.norm(term, 1) <= tol * np.linalg.norm(result, 1):
            break
    for _ in range(squarings):
        result = result @ result
    return result


def dense_evolve(register: QubitRegister, pairs: Sequence[PairSpec], t: float) -> QubitRegister:
    h = dense_hamiltonian(pairs, register.num_pairs)
    return register.with_amplitudes(expm_taylor(-1j * t * h) @ register.amplitudes)
