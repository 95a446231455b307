"""Cloning cost functions, parameter-shift gradients, and bound calculators.

Four cost kinds over a sample batch drawn from the task's state family:

* Local      : 1 - mean per-clone fidelity.
* Squared    : mean of sum_i (1-F_i)^2 + sum_{i<j} (F_i-F_j)^2; penalizes
               asymmetry between clones, unlike the plain local cost.
* Global     : 1 - mean fidelity of the joint clone registers against
               |psi>^{x N} (ancilla traced out).
* Asymmetric : squared deviation of the two clone fidelities from the
               target pair (F_B(p), F_E(p)); 1 -> 2 only.

Gradients use the parameter-shift rule: every rotation generator is a
Pauli, so dF/dtheta = (F(theta + pi/2) - F(theta - pi/2)) / 2 exactly,
with the same fixed batch reused across all shifted evaluations. A
central-finite-difference oracle is provided for cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from vqclone.circuit import (
    CloneTask,
    GatePool,
    GateSequence,
    GateSpec,
    clone_fidelities_batch,
    global_fidelities_batch,
    prepare_input_batch,
    run_sequence,
)
from vqclone.families import StateFamily, StateSample, asym_fidelity_pair, sample_matrix

LOCAL = "Local"
SQUARED = "Squared"
GLOBAL = "Global"
ASYMMETRIC = "Asymmetric"


@dataclass(frozen=True)
class CostKind:
    variant: str
    p: float | None = None

    def __post_init__(self):
        if self.variant not in (LOCAL, SQUARED, GLOBAL, ASYMMETRIC):
            raise ValueError(f"unknown cost variant {self.variant!r}")
        if self.variant == ASYMMETRIC:
            if self.p is None or not 0 <= self.p <= 1:
                raise ValueError("Asymmetric cost needs p in [0,1]")

    @staticmethod
    def local() -> "CostKind":
        return CostKind(LOCAL)

    @staticmethod
    def squared() -> "CostKind":
        return CostKind(SQUARED)

    @staticmethod
    def global_() -> "CostKind":
        return CostKind(GLOBAL)

    @staticmethod
    def asymmetric(p: float) -> "CostKind":
        return CostKind(ASYMMETRIC, p)


@dataclass
class CostReport:
    value: float
    per_clone_fidelities: np.ndarray
    global_fidelity: float
    batch_size: int


def batch_matrix(batch) -> np.ndarray:
    """Accept a list of StateSample or a prebuilt (2, K) column matrix."""
    if isinstance(batch, np.ndarray):
        if batch.ndim != 2 or batch.shape[0] != 2:
            raise ValueError("batch matrix must have shape (2, K)")
        return batch
    if not batch:
        raise ValueError("empty batch")
    return np.stack([b.state for b in batch], axis=1)


def _propagate(task: CloneTask, seq: GateSequence, theta,
               targets: np.ndarray) -> np.ndarray:
    psi0 = prepare_input_batch(task, targets)
    return run_sequence(seq, theta, psi0, task.total_qubits)


def _local_fids(task, seq, theta, targets) -> np.ndarray:
    out = _propagate(task, seq, theta, targets)
    return clone_fidelities_batch(out, task.total_qubits,
                                  task.clone_registers, targets)


def _global_fids(task, seq, theta, targets) -> np.ndarray:
    out = _propagate(task, seq, theta, targets)
    return global_fidelities_batch(out, task.total_qubits,
                                   task.clone_registers, targets)


def _squared_value(fids: np.ndarray) -> np.ndarray:
    dev = ((1 - fids) ** 2).sum(axis=0)
    n = fids.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            dev = dev + (fids[i] - fids[j]) ** 2
    return dev


def _report(task, seq, theta, targets, value, fids) -> CostReport:
    out = _propagate(task, seq, theta, targets)
    gf = global_fidelities_batch(out, task.total_qubits,
                                 task.clone_registers, targets)
    return CostReport(float(value), fids.mean(axis=1), float(gf.mean()),
                      targets.shape[1])


def local_cost(task, seq, theta, batch) -> CostReport:
    targets = batch_matrix(batch)
    fids = _local_fids(task, seq, theta, targets)
    return _report(task, seq, theta, targets, 1.0 - fids.mean(), fids)


def squared_cost(task, seq, theta, batch) -> CostReport:
    targets = batch_matrix(batch)
    fids = _local_fids(task, seq, theta, targets)
    return _report(task, seq, theta, targets,
                   _squared_value(fids).mean(), fids)


def global_cost(task, seq, theta, batch) -> CostReport:
    targets = batch_matrix(batch)
    fids = _local_fids(task, seq, theta, targets)
    out = _propagate(task, seq, theta, targets)
    gf = global_fidelities_batch(out, task.total_qubits,
                                 task.clone_registers, targets)
    return CostReport(float(1.0 - gf.mean()), fids.mean(axis=1),
                      float(gf.mean()), targets.shape[1])


def asymmetric_cost(task, seq, theta, batch, p: float) -> CostReport:
    if task.n_out != 2:
        raise ValueError("asymmetric cost is defined for 1 -> 2 tasks")
    targets = batch_matrix(batch)
    fids = _local_fids(task, seq, theta, targets)
    t_b, t_e = asym_fidelity_pair(p)
    value = ((t_b - fids[0]) ** 2).mean() + ((t_e - fids[1]) ** 2).mean()
    return _report(task, seq, theta, targets, value, fids)


def cost_report(kind: CostKind, task, seq, theta, batch) -> CostReport:
    if kind.variant == LOCAL:
        return local_cost(task, seq, theta, batch)
    if kind.variant == SQUARED:
        return squared_cost(task, seq, theta, batch)
    if kind.variant == GLOBAL:
        return global_cost(task, seq, theta, batch)
    return asymmetric_cost(task, seq, theta, batch, kind.p)


def cost_value(kind: CostKind, task, seq, theta, targets: np.ndarray) -> float:
    """Cost alone, skipping the report extras (training hot path)."""
    if kind.variant == GLOBAL:
        return float(1.0 - _global_fids(task, seq, theta, targets).mean())
    fids = _local_fids(task, seq, theta, targets)
    if kind.variant == LOCAL:
        return float(1.0 - fids.mean())
    if kind.variant == SQUARED:
        return float(_squared_value(fids).mean())
    if task.n_out != 2:
        raise ValueError("asymmetric cost is defined for 1 -> 2 tasks")
    t_b, t_e = asym_fidelity_pair(kind.p)
    return float(((t_b - fids[0]) ** 2).mean() + ((t_e - fids[1]) ** 2).mean())


def grad(kind: CostKind, task, seq, theta, batch) -> np.ndarray:
    """Analytic parameter-shift gradient; zeros at unparameterized slots."""
    targets = batch_matrix(batch)
    theta = np.asarray(theta, dtype=float)
    mask = seq.parameterized_mask()
    g = np.zeros(len(theta))
    use_global = kind.variant == GLOBAL
    if not use_global:
        fids0 = _local_fids(task, seq, theta, targets)
        if kind.variant == ASYMMETRIC:
            t_b, t_e = asym_fidelity_pair(kind.p)
    for l in range(len(theta)):
        if not mask[l]:
            continue
        plus = theta.copy(); plus[l] += math.pi / 2
        minus = theta.copy(); minus[l] -= math.pi / 2
        if use_global:
            dg = 0.5 * (_global_fids(task, seq, plus, targets)
                        - _global_fids(task, seq, minus, targets))
            g[l] = -dg.mean()
            continue
        df = 0.5 * (_local_fids(task, seq, plus, targets)
                    - _local_fids(task, seq, minus, targets))
        if kind.variant == LOCAL:
            g[l] = -df.mean()
        elif kind.variant == SQUARED:
            term = (-2 * (1 - fids0) * df).sum(axis=0)
            n = fids0.shape[0]
            for i in range(n):
                for j in range(i + 1, n):
                    term = term + 2 * (fids0[i] - fids0[j]) * (df[i] - df[j])
            g[l] = term.mean()
        else:
            g[l] = (-2 * (t_b - fids0[0]) * df[0]
                    - 2 * (t_e - fids0[1]) * df[1]).mean()
    return g


def finite_diff_grad(kind: CostKind, task, seq, theta, batch,
                     h: float = 1e-5) -> np.ndarray:
    """Central-difference oracle on the exact cost, same fixed batch."""
    if h <= 0:
        raise ValueError("h must be positive")
    targets = batch_matrix(batch)
    theta = np.asarray(theta, dtype=float)
    mask = seq.parameterized_mask()
    g = np.zeros(len(theta))
    for l in range(len(theta)):
        if not mask[l]:
            continue
        plus = theta.copy(); plus[l] += h
        minus = theta.copy(); minus[l] -= h
        g[l] = (cost_value(kind, task, seq, plus, targets)
                - cost_value(kind, task, seq, minus, targets)) / (2 * h)
    return g


# ---------------------------------------------------------------------------
# bound calculators


@dataclass
class FaithfulnessBounds:
    """Distance bounds implied by an epsilon-optimal cost value.

    f-values bound the Fubini-Study distance, g-values the trace distance,
    between the trained clone and the reference optimal clone. f1/g1 belong
    to the squared cost, f2/g2 to the local cost, fs_global/g3 to the
    global cost; ``fs_bound``/``tr_bound`` pick the pair matching the
    requested kind.
    """

    f1: float
    g1: float
    f2: float
    g2: float
    fs_global: float
    g3: float
    fs_bound: float
    tr_bound: float


def faithfulness_bounds(epsilon: float, f_opt: float, normalization: float,
                        kind: CostKind) -> FaithfulnessBounds:
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if not 0 < f_opt < 1:
        raise ValueError("f_opt must lie strictly inside (0,1)")
    n_eps = normalization * epsilon
    f1 = n_eps / (2 * (1 - f_opt) * math.sin(f_opt))
    g1 = 0.5 * math.sqrt(max(0.0, 4 * f_opt * (1 - f_opt)
                             + n_eps * (1 - 2 * f_opt) / (2 * (1 - f_opt))))
    f2 = n_eps / math.sin(f_opt)
    g2 = 0.5 * math.sqrt(max(0.0, 4 * f_opt * (1 - f_opt)
                             + n_eps * (1 - 2 * f_opt)))
    fs_global = f2
    g3 = g2
    if kind.variant == SQUARED:
        fs, tr = f1, g1
    elif kind.variant == LOCAL:
        fs, tr = f2, g2
    elif kind.variant == GLOBAL:
        fs, tr = fs_global, g3
    else:
        raise ValueError("no faithfulness bounds for the asymmetric cost")
    return FaithfulnessBounds(f1, g1, f2, g2, fs_global, g3, fs, tr)


def cost_sandwich_check(task, seq, theta, batch) -> tuple[float, float, bool]:
    """Evaluate (C_L, C_G) on a shared batch and check
    C_L <= C_G <= N * C_L."""
    targets = batch_matrix(batch)
    c_l = cost_value(CostKind.local(), task, seq, theta, targets)
    c_g = cost_value(CostKind.global_(), task, seq, theta, targets)
    tol = 1e-9
    holds = (c_l <= c_g + tol) and (c_g <= task.n_out * c_l + tol)
    return c_l, c_g, holds


# ---------------------------------------------------------------------------
# gradient-variance (barren plateau) experiment


def layered_ansatz(num_qubits: int, layers: int) -> tuple[GateSequence, np.ndarray]:
    """Alternating layered ansatz: RY on every qubit then a brickwork of CZ,
    offset by one qubit on odd layers."""
    gates, g = [], []
    for layer in range(layers):
        for q in range(num_qubits):
            gates.append(GateSpec("RY", (q,)))
        for q in range(layer % 2, num_qubits - 1, 2):
            gates.append(GateSpec("CZ", (q, q + 1)))
    pool = GatePool(gates)
    g = list(range(len(gates)))
    seq = GateSequence(pool, g)
    return seq, np.zeros(len(gates))


def plateau_lower_bound(layers: int, n_clones: int, block_k: int = 0) -> float:
    """Simplified gradient-variance floor 2^k / (3^(K+k+2) * 2 N^2)."""
    return 2 ** block_k / (3 ** (layers + block_k + 2) * 2 * n_clones ** 2)


def gradient_variance_experiment(n_qubits: int, layers: int, block_k: int = 0,
                                 n_samples: int = 500, seed=0,
                                 batch_size: int = 20) -> tuple[float, float]:
    """Empirical Var[dC_L/dtheta_1] over random angles vs the analytic floor.

    Task: 1 -> n_qubits local-cost cloning of equatorial states on the
    alternating layered ansatz with ``layers`` layers. The variance is taken
    of the first rotation's gradient component across ``n_samples`` uniform
    random parameter vectors, with one fixed input batch.
    """
    seq, _ = layered_ansatz(n_qubits, layers)
    task = CloneTask(1, n_qubits, 0, list(range(n_qubits)),
                     StateFamily("PhaseCovariant"))
    targets, _ = sample_matrix(task.family, batch_size, seed)
    rng = np.random.default_rng(seed)
    comps = np.empty(n_samples)
    for i in range(n_samples):
        theta = rng.uniform(0, 2 * math.pi, size=len(seq))
        comps[i] = grad_component(CostKind.local(), task, seq, theta,
                                  targets, 0)
    return float(comps.var()), plateau_lower_bound(layers, n_qubits, block_k)


def grad_component(kind: CostKind, task, seq, theta, targets,
                   position: int) -> float:
    """Single parameter-shift gradient component (used by the variance
    experiment; cheaper than a full grad call)."""
    theta = np.asarray(theta, dtype=float)
    if not seq.parameterized_mask()[position]:
        return 0.0
    plus = theta.copy(); plus[position] += math.pi / 2
    minus = theta.copy(); minus[position] -= math.pi / 2
    if kind.variant == GLOBAL:
        dg = 0.5 * (_global_fids(task, seq, plus, targets)
                    - _global_fids(task, seq, minus, targets))
        return float(-dg.mean())
    fids0 = _local_fids(task, seq, theta, targets)
    df = 0.5 * (_local_fids(task, seq, plus, targets)
                - _local_fids(task, seq, minus, targets))
    if kind.variant == LOCAL:
        return float(-df.mean())
    if kind.variant == SQUARED:
        term = (-2 * (1 - fids0) * df).sum(axis=0)
        n = fids0.shape[0]
        for i in range(n):
            for j in range(i + 1, n):
                term = term + 2 * (fids0[i] - fids0[j]) * (df[i] - df[j])
        return float(term.mean())
    t_b, t_e = asym_fidelity_pair(kind.p)
    return float((-2 * (t_b - fids0[0]) * df[0]
                  - 2 * (t_e - fids0[1]) * df[1]).mean())
