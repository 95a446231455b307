"""Dense complex linear algebra and distance measures for small operators.

Everything here works on plain ``numpy`` arrays; ``DensityMatrix`` and
``PureState`` are thin validating wrappers used at module boundaries. All
functions accept either the wrapper or a raw array.

Qubit 0 is the most significant bit of the basis index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-9
EIG_CLAMP = -1e-10  # eigenvalues above this are treated as >= 0 and clamped
PURITY_TOL = 1e-9


def _mat(x) -> np.ndarray:
    if isinstance(x, DensityMatrix):
        return x.matrix
    return np.asarray(x, dtype=complex)


@dataclass
class PureState:
    """Normalized complex amplitude vector over 2^n basis states."""

    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        nrm = np.linalg.norm(self.amplitudes)
        if abs(nrm - 1.0) > 1e-10:
            raise ValueError(f"state norm {nrm} deviates from 1 beyond 1e-10")
        d = self.amplitudes.shape[0]
        if d & (d - 1):
            raise ValueError(f"length {d} is not a power of two")

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.shape[0].bit_length() - 1

    def density(self) -> "DensityMatrix":
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()), self.num_qubits)


@dataclass
class DensityMatrix:
    """Hermitian PSD unit-trace operator on n qubits.

    Validation enforces Hermiticity to 1e-10, trace 1 to 1e-9 and
    eigenvalues >= -1e-10 (small negatives are the caller's floating
    debris and are tolerated, not stored clamped).
    """

    matrix: np.ndarray
    num_qubits: int = field(default=None)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        d = self.matrix.shape[0]
        if self.matrix.ndim != 2 or self.matrix.shape[1] != d:
            raise ValueError("density matrix must be square")
        if self.num_qubits is None:
            self.num_qubits = d.bit_length() - 1
        if 2 ** self.num_qubits != d:
            raise ValueError(f"dim {d} does not match {self.num_qubits} qubits")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("non-finite entries")
        if np.abs(self.matrix - self.matrix.conj().T).max() > HERMITICITY_TOL:
            raise ValueError("matrix not Hermitian within 1e-10")
        tr = np.trace(self.matrix).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr} deviates from 1 beyond 1e-9")
        if np.linalg.eigvalsh(self.matrix).min() < EIG_CLAMP:
            raise ValueError("negative eigenvalue beyond tolerance")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


def kron(a, b) -> np.ndarray:
    """Tensor product with a's indices most significant."""
    a, b = _mat(a), _mat(b)
    if a.shape[0] != a.shape[1] or b.shape[0] != b.shape[1]:
        raise ValueError("kron expects square matrices")
    return np.kron(a, b)


def partial_trace(rho, keep: list[int], num_qubits: int | None = None) -> np.ndarray:
    """Trace out all qubits not in ``keep``.

    Result axes follow the order given in ``keep`` (qubit keep[i] becomes
    qubit i of the reduced operator).
    """
    m = _mat(rho)
    if num_qubits is None:
        num_qubits = m.shape[0].bit_length() - 1
    if not keep:
        raise ValueError("keep must be non-empty")
    if len(set(keep)) != len(keep):
        raise ValueError("keep indices must be distinct")
    for q in keep:
        if not 0 <= q < num_qubits:
            raise IndexError(f"qubit {q} out of range for {num_qubits} qubits")
    t = m.reshape((2,) * (2 * num_qubits))
    drop = [q for q in range(num_qubits) if q not in keep]
    # contract row/column axes of every dropped qubit
    for q in sorted(drop, reverse=True):
        t = np.trace(t, axis1=q, axis2=q + (t.ndim // 2))
    # axes now follow ascending surviving-qubit order; permute to keep order
    asc = sorted(keep)
    perm = [asc.index(q) for q in keep]
    k = len(keep)
    t = t.transpose(perm + [p + k for p in perm])
    return t.reshape(2 ** k, 2 ** k)


def _pure_vector(m: np.ndarray) -> np.ndarray | None:
    """Principal eigenvector if m is rank one (pure), else None."""
    if abs(np.trace(m @ m).real - 1.0) > PURITY_TOL:
        return None
    w, v = np.linalg.eigh(m)
    return v[:, -1]


def matrix_sqrt_psd(m) -> np.ndarray:
    """Hermitian PSD square root by eigendecomposition; tiny negative
    eigenvalues (>= -1e-10) are clamped to zero."""
    m = _mat(m)
    if np.abs(m - m.conj().T).max() > 1e-8:
        raise ValueError("matrix_sqrt_psd requires a Hermitian input")
    w, v = np.linalg.eigh(m)
    if w.min() < EIG_CLAMP * m.shape[0] * 100:
        raise ValueError(f"eigenvalue {w.min()} below PSD tolerance")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    When either argument is pure this reduces to the overlap Tr(rho sigma)
    and that cheap path is taken.
    """
    r, s = _mat(rho), _mat(sigma)
    if r.shape != s.shape:
        raise ValueError("dimension mismatch")
    if _pure_vector(r) is not None or _pure_vector(s) is not None:
        f = np.trace(r @ s).real
    else:
        sr = matrix_sqrt_psd(r)
        inner = matrix_sqrt_psd(sr @ s @ sr)
        f = np.trace(inner).real ** 2
    return float(min(max(f, 0.0), 1.0))


def trace_distance(rho, sigma) -> float:
    """(1/2) * trace norm of (rho - sigma) from its eigenvalues."""
    r, s = _mat(rho), _mat(sigma)
    if r.shape != s.shape:
        raise ValueError("dimension mismatch")
    return float(0.5 * np.abs(np.linalg.eigvalsh(r - s)).sum())


def fubini_study(rho, sigma) -> float:
    """arccos(sqrt(F)) in [0, pi/2]."""
    return float(np.arccos(np.sqrt(fidelity(rho, sigma))))
