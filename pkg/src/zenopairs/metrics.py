"""Reduced states, Wootters concurrence and excitation counts."""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from .register import QubitRegister, all_qubits, as_qubit, norm_squared

DENSITY_TOL = 1e-9
_SYSY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


class DensityMatrixError(ValueError):
    pass


def _require_normalized(register: QubitRegister):
    n2 = norm_squared(register)
    if abs(n2 - 1.0) > DENSITY_TOL:
        raise DensityMatrixError(f"register must be normalized (norm^2 = {n2!r})")


def reduce_to(register: QubitRegister, qubits) -> np.ndarray:
    """Partial trace onto ``qubits``; the first listed qubit is the most significant slot."""
    qs = [as_qubit(q) for q in qubits]
    if len(set(qs)) != len(qs):
        raise DensityMatrixError(f"qubits must be distinct, got {[str(q) for q in qs]}")
    _require_normalized(register)
    m = register.num_pairs
    n = 2 * m
    axes = [n - 1 - q.bit(m) for q in qs]
    psi = np.moveaxis(register.amplitudes.reshape((2,) * n), axes, list(range(len(qs))))
    x = psi.reshape(1 << len(qs), -1)
    return x @ x.conj().T


def reduce_to_pair(register: QubitRegister, q1, q2) -> np.ndarray:
    """4x4 density matrix over (|00>, |01>, |10>, |11>) of the slots (q1, q2)."""
    return reduce_to(register, [q1, q2])


def _check_density(rho: np.ndarray):
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (4, 4):
        raise DensityMatrixError(f"expected a 4x4 matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > DENSITY_TOL:
        raise DensityMatrixError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > DENSITY_TOL:
        raise DensityMatrixError(f"density matrix trace is {np.trace(rho).real!r}, expected 1")
    return rho


def _psd_sqrt(h: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def concurrence(rho) -> float:
    rho = _check_density(rho)
    rho = 0.5 * (rho + rho.conj().T)
    w, v = np.linalg.eigh(rho)
    vecs = v * np.sqrt(np.clip(w, 0.0, None))
    # with rho = V V^dagger, the Wootters lambdas are the singular values of
    # V^T (sy x sy) V; this avoids squaring them, so small values stay accurate
    lam = np.linalg.svd(vecs.T @ _SYSY @ vecs, compute_uv=False)
    return float(min(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]), 1.0))


def concurrence_between(register: QubitRegister, q1, q2) -> float:
    return concurrence(reduce_to_pair(register, q1, q2))


def state_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))**2."""
    s = _psd_sqrt(rho)
    inner = s @ sigma @ s
    w = np.clip(np.linalg.eigvalsh(0.5 * (inner + inner.conj().T)), 0.0, None)
    return float(min(np.sum(np.sqrt(w)) ** 2, 1.0))


def excitation_of(register: QubitRegister, subset: Optional[Iterable] = None) -> float:
    """Expected number of excited qubits in ``subset`` (the whole register by default)."""
    _require_normalized(register)
    m = register.num_pairs
    qs = all_qubits(m) if subset is None else [as_qubit(q) for q in subset]
    probs = np.abs(register.amplitudes) ** 2
    idx = np.arange(register.dim)
    total = 0.0
    for q in set(qs):
        total += float(probs[(idx >> q.bit(m)) & 1 == 1].sum())
    return total


def excitation_expectation(register: QubitRegister) -> float:
    return excitation_of(register)
