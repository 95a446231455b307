"""Parameterized gate sequences over a gate pool.

Circuits evolve pure states; the batched fast path keeps a whole sample set
as the columns of a (2^n, K) array so one gate application is a single
einsum. Rotation convention: R_P(theta) = exp(-i * theta * P / 2). CZ is
diag(1,1,1,-1) on its qubit pair and carries a dummy angle fixed at 0.

The first gate listed in a sequence is the first applied to the state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from vqclone.qmath import DensityMatrix, PureState, partial_trace

ROTATION_KINDS = ("RX", "RY", "RZ")
GATE_KINDS = ROTATION_KINDS + ("CZ",)

_PAULI = {
    "RX": np.array([[0, 1], [1, 0]], dtype=complex),
    "RY": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "RZ": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class GateSpec:
    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if self.kind == "CZ":
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError("CZ needs two distinct qubits")
        elif len(self.qubits) != 1:
            raise ValueError(f"{self.kind} acts on exactly one qubit")

    @property
    def parameterized(self) -> bool:
        return self.kind != "CZ"


@dataclass
class GatePool:
    gates: list[GateSpec]

    def __post_init__(self):
        if not self.gates:
            raise ValueError("empty gate pool")

    def __len__(self):
        return len(self.gates)

    def __getitem__(self, i) -> GateSpec:
        return self.gates[i]

    def rotation_indices(self) -> list[int]:
        return [i for i, g in enumerate(self.gates) if g.parameterized]


def _pool_on(num_qubits: int, cz_pairs: list[tuple[int, int]]) -> GatePool:
    gates = [GateSpec(k, (q,)) for q in range(num_qubits) for k in ROTATION_KINDS]
    gates += [GateSpec("CZ", p) for p in cz_pairs]
    return GatePool(gates)


def pc_pool() -> GatePool:
    """3-qubit pool: all single-qubit rotations plus every CZ pair."""
    return _pool_on(3, [(0, 1), (1, 2), (0, 2)])


def nn_pool(num_qubits: int) -> GatePool:
    """Rotations on each qubit plus CZ on nearest-neighbour pairs only."""
    return _pool_on(num_qubits, [(q, q + 1) for q in range(num_qubits - 1)])


def fc_pool(num_qubits: int) -> GatePool:
    """Rotations plus CZ on all qubit pairs (full connectivity)."""
    pairs = [(a, b) for a in range(num_qubits) for b in range(a + 1, num_qubits)]
    return _pool_on(num_qubits, pairs)


@dataclass
class GateSequence:
    pool: GatePool
    g: list[int]

    def __post_init__(self):
        for i in self.g:
            if not 0 <= i < len(self.pool):
                raise ValueError(f"gate index {i} outside pool")

    def __len__(self):
        return len(self.g)

    def specs(self) -> list[GateSpec]:
        return [self.pool[i] for i in self.g]

    def parameterized_mask(self) -> np.ndarray:
        return np.array([self.pool[i].parameterized for i in self.g])


@dataclass
class CloneTask:
    """One M -> N cloning problem over a state family.

    Input layout: M copies of the unknown state, then N-M blanks, then
    ancilla qubits, so total qubits = n_out + num_ancilla.
    """

    m_in: int
    n_out: int
    num_ancilla: int
    clone_registers: list[int]
    family: object = None

    def __post_init__(self):
        if not 1 <= self.m_in <= self.n_out:
            raise ValueError("need 1 <= M <= N")
        if self.num_ancilla < 0:
            raise ValueError("negative ancilla count")
        if len(set(self.clone_registers)) != len(self.clone_registers):
            raise ValueError("clone registers must be distinct")
        if len(self.clone_registers) != self.n_out:
            raise ValueError("need exactly N clone registers")
        for q in self.clone_registers:
            if not 0 <= q < self.total_qubits:
                raise ValueError(f"register {q} out of range")

    @property
    def total_qubits(self) -> int:
        return self.n_out + self.num_ancilla


def _rotation_2x2(kind: str, angle: float) -> np.ndarray:
    p = _PAULI[kind]
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * p


def gate_unitary(spec: GateSpec, angle: float, total_qubits: int) -> np.ndarray:
    """Full 2^n unitary for one gate (test/oracle path, not the hot path)."""
    for q in spec.qubits:
        if q >= total_qubits:
            raise ValueError(f"qubit {q} out of range for n={total_qubits}")
    u = np.eye(1, dtype=complex)
    if spec.kind == "CZ":
        n = total_qubits
        d = 2 ** n
        u = np.eye(d, dtype=complex)
        a, b = spec.qubits
        for idx in range(d):
            if (idx >> (n - 1 - a)) & 1 and (idx >> (n - 1 - b)) & 1:
                u[idx, idx] = -1
        return u
    g = _rotation_2x2(spec.kind, angle)
    for q in range(total_qubits):
        u = np.kron(u, g if q == spec.qubits[0] else np.eye(2))
    return u


def build_unitary(seq: GateSequence, theta, total_qubits: int) -> np.ndarray:
    """Ordered product; first listed gate acts first on the state."""
    theta = np.asarray(theta, dtype=float)
    if len(theta) != len(seq):
        raise ValueError("theta length does not match sequence")
    u = np.eye(2 ** total_qubits, dtype=complex)
    for idx, ang in zip(seq.g, theta):
        u = gate_unitary(seq.pool[idx], ang, total_qubits) @ u
    return u


# ---------------------------------------------------------------------------
# batched state propagation: states held as columns of a (2^n, K) array


def apply_rotation(states: np.ndarray, num_qubits: int, qubit: int, kind: str,
                   angle: float) -> np.ndarray:
    u = _rotation_2x2(kind, angle)
    pre = 2 ** qubit
    post = states.size // (pre * 2)
    v = states.reshape(pre, 2, post)
    return np.einsum("ij,ajb->aib", u, v).reshape(states.shape)

def apply_cz(states: np.ndarray, num_qubits: int, q1: int, q2: int) -> np.ndarray:
    a, b = min(q1, q2), max(q1, q2)
    mid = 2 ** (b - a - 1)
    v = states.reshape(2 ** a, 2, mid, 2, -1).copy()
    v[:, 1, :, 1, :] *= -1
    return v.reshape(states.shape)


def apply_gate(states: np.ndarray, num_qubits: int, spec: GateSpec,
               angle: float) -> np.ndarray:
    if spec.kind == "CZ":
        return apply_cz(states, num_qubits, *spec.qubits)
    return apply_rotation(states, num_qubits, spec.qubits[0], spec.kind, angle)


def run_sequence(seq: GateSequence, theta, states: np.ndarray,
                 num_qubits: int) -> np.ndarray:
    """Propagate a (2^n, K) batch through the circuit."""
    theta = np.asarray(theta, dtype=float)
    out = states
    for idx, ang in zip(seq.g, theta):
        out = apply_gate(out, num_qubits, seq.pool[idx], ang)
    return out


def prepare_input(task: CloneTask, psi: np.ndarray) -> np.ndarray:
    """|psi>^{x M} (x) |0>^{x (N-M)} (x) |0>^{x ancilla} as a flat vector."""
    psi = np.asarray(psi, dtype=complex).ravel()
    vec = np.ones(1, dtype=complex)
    for _ in range(task.m_in):
        vec = np.kron(vec, psi)
    pad = task.total_qubits - task.m_in
    if pad:
        blank = np.zeros(2 ** pad, dtype=complex)
        blank[0] = 1.0
        vec = np.kron(vec, blank)
    return vec


def prepare_input_batch(task: CloneTask, states: np.ndarray) -> np.ndarray:
    """Batched prepare_input: (2, K) single-qubit inputs -> (2^n, K)."""
    k = states.shape[1]
    vec = np.ones((1, k), dtype=complex)
    for _ in range(task.m_in):
        vec = np.einsum("ak,bk->abk", vec, states).reshape(-1, k)
    pad = task.total_qubits - task.m_in
    if pad:
        out = np.zeros((vec.shape[0], 2 ** pad, k), dtype=complex)
        out[:, 0, :] = vec
        return out.reshape(-1, k)
    return vec


def run_clone_task(task: CloneTask, seq: GateSequence, theta,
                   input_state) -> DensityMatrix:
    """Evolve an input through the circuit; exact, no sampling.

    Accepts either the single unknown qubit state (copies, blanks, and
    ancillas are assembled automatically) or an already-assembled full
    register vector.
    """
    vec = input_state.amplitudes if isinstance(input_state, PureState) else \
        np.asarray(input_state, dtype=complex).ravel()
    n = task.total_qubits
    if vec.size == 2 and n != 1:
        vec = prepare_input(task, vec)
    elif vec.size != 2 ** n:
        raise ValueError("input dimension does not match task qubit count")
    out = run_sequence(seq, theta, vec.reshape(-1, 1), n)[:, 0]
    return DensityMatrix(np.outer(out, out.conj()), n)


def clone_states(rho_out: DensityMatrix, task: CloneTask) -> list[DensityMatrix]:
    """Single-qubit reduced states in clone_registers order."""
    if rho_out.num_qubits != task.total_qubits:
        raise ValueError("output operator does not match task qubit count")
    return [DensityMatrix(partial_trace(rho_out, [q]), 1)
            for q in task.clone_registers]


def clone_fidelities_batch(out: np.ndarray, num_qubits: int,
                           registers: list[int],
                           targets: np.ndarray) -> np.ndarray:
    """Fidelity of each clone register against its target, per batch column.

    out: (2^n, K) propagated batch; targets: (2, K) single-qubit pure
    targets. Returns (N, K) real fidelities. Pure-vs-mixed overlap only,
    no matrix square roots needed.
    """
    k = out.shape[1]
    fids = np.empty((len(registers), k))
    for r, q in enumerate(registers):
        pre = 2 ** q
        post = out.size // k // (pre * 2)
        v = out.reshape(pre, 2, post, k)
        rho = np.einsum("aibk,ajbk->ijk", v, v.conj())
        fids[r] = np.einsum("ik,ijk,jk->k", targets.conj(), rho, targets).real
    return fids


def global_fidelities_batch(out: np.ndarray, num_qubits: int,
                            registers: list[int],
                            targets: np.ndarray) -> np.ndarray:
    """Overlap of the joint clone registers with |psi>^{x N}, per column.

    Ancilla (non-register qubits) are traced out implicitly by contracting
    the joint register density matrix with the pure product target.
    """
    k = out.shape[1]
    n = num_qubits
    t = out.reshape((2,) * n + (k,))
    others = [q for q in range(n) if q not in registers]
    t = t.transpose(list(registers) + others + [n])
    dn = 2 ** len(registers)
    t = t.reshape(dn, -1, k)
    prod = np.ones((1, k), dtype=complex)
    for _ in registers:
        prod = np.einsum("ak,bk->abk", prod, targets).reshape(-1, k)
    amp = np.einsum("ik,iek->ek", prod.conj(), t)
    return np.einsum("ek,ek->k", amp, amp.conj()).real


# ---------------------------------------------------------------------------
# circuit file format: JSON array of {"kind", "qubits", "theta"} records


def serialize_circuit(seq: GateSequence, theta) -> str:
    theta = np.asarray(theta, dtype=float)
    if len(theta) != len(seq):
        raise ValueError("theta length does not match sequence")
    records = [
        {"kind": s.kind, "qubits": list(s.qubits), "theta": float(a)}
        for s, a in zip(seq.specs(), theta)
    ]
    return json.dumps(records, indent=1)


def parse_circuit(text: str) -> tuple[GateSequence, np.ndarray]:
    """Inverse of serialize_circuit.

    The returned sequence's pool holds one entry per distinct gate in file
    order; gate kinds, qubits, and angles round-trip exactly (angles to full
    float precision via JSON repr).
    """
    try:
        records = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"malformed circuit file: {e}") from e
    if not isinstance(records, list):
        raise ValueError("circuit file must hold a JSON array")
    specs, theta = [], []
    for rec in records:
        specs.append(GateSpec(rec["kind"], tuple(rec["qubits"])))
        theta.append(float(rec.get("theta", 0.0)))
    distinct: list[GateSpec] = []
    index: dict[GateSpec, int] = {}
    for s in specs:
        if s not in index:
            index[s] = len(distinct)
            distinct.append(s)
    if not distinct:
        distinct = [GateSpec("RZ", (0,))]
        pool = GatePool(distinct)
        return GateSequence(pool, []), np.zeros(0)
    pool = GatePool(distinct)
    return GateSequence(pool, [index[s] for s in specs]), np.array(theta)
