"""Variable-structure circuit search.

Outer loop proposes a structural change (replace d gates, d drawn with
Pr(d)=2^-d), compresses out redundancies, retrains the angles, and keeps the
candidate only on strict cost improvement. The inner trainer shares one fixed
target batch across all candidates so comparisons are apples to apples, and
cuts hopeless candidates short once they sit above the incumbent by more than
a slack for `patience` epochs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from vqclone.circuit import CloneTask, GatePool, GateSequence, GateSpec
from vqclone.cost import CostKind, cost_value
from vqclone.families import sample_matrix
from vqclone.train import TrainConfig, train


@dataclass
class SearchConfig:
    seq_len: int
    pool: GatePool
    iterations: int = 50
    epochs_per_iter: int = 100
    seed: int = 0
    accept_rule: str = "strict"
    start: str = "warm"  # warm: keep trained angles at untouched positions
    init_structure: str = "random"  # "random" | "layered"
    init_epochs: int | None = None  # long initial training; None -> epochs_per_iter
    polish_epochs: int = 0  # extra training of the final best circuit
    batch_size: int = 40  # target count for families without a finite state set
    learning_rate: float = 0.05
    patience: int = 30
    slack: float = 0.02

    def __post_init__(self):
        if self.seq_len < 1:
            raise ValueError("seq_len must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.accept_rule != "strict":
            raise ValueError("only strict-improvement acceptance is supported")
        if self.start not in ("warm", "cold"):
            raise ValueError(f"unknown start mode {self.start!r}")
        if self.init_structure not in ("random", "layered"):
            raise ValueError(f"unknown init_structure {self.init_structure!r}")


@dataclass
class SearchResult:
    best_seq: GateSequence
    best_theta: np.ndarray
    best_cost: float
    cost_history: list[float]
    seed: int = 0
    pool_size: int = 0
    accepted: int = 0

    def summary(self) -> dict:
        return {
            "best_cost": self.best_cost,
            "iterations": len(self.cost_history) - 1,
            "accepted": self.accepted,
            "seed": self.seed,
            "pool_size": self.pool_size,
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=1)


def draw_d(seq_len: int, rng) -> int:
    """Perturbation size: Pr(d)=2^-d for d=1..l, leftover mass 2^-l on 0."""
    u = rng.random()
    acc = 0.0
    for d in range(1, seq_len + 1):
        acc += 0.5 ** d
        if u < acc:
            return d
    return 0


def _random_angle(spec: GateSpec, rng) -> float:
    return float(rng.uniform(0, 2 * np.pi)) if spec.parameterized else 0.0


def perturb(indices, theta, pool: GatePool, rng):
    """Replace d uniformly chosen positions with uniformly drawn pool gates,
    fresh angles on the new gates. d=0 leaves the circuit unchanged."""
    indices = indices.copy()
    theta = theta.copy()
    d = draw_d(len(indices), rng)
    if d == 0:
        return indices, theta
    positions = rng.choice(len(indices), size=d, replace=False)
    for p in positions:
        gi = int(rng.integers(len(pool.gates)))
        indices[p] = gi
        theta[p] = _random_angle(pool.gates[gi], rng)
    return indices, theta


def compress(indices, theta, pool: GatePool, rng, seq_len: int | None = None):
    """Merge adjacent same-gate rotations (angles summed mod 2pi), cancel
    adjacent CZ pairs, drop rotations at angle 0 mod 2pi, then pad with
    rotation gates at angle 0 back to seq_len. Unitary-preserving up to a
    global phase; padding at angle 0 keeps the exact cost unchanged."""
    if seq_len is None:
        seq_len = len(indices)
    gi = list(indices)
    th = list(theta)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(gi) - 1:
            if gi[i] == gi[i + 1]:
                if pool.gates[gi[i]].parameterized:
                    th[i] = (th[i] + th[i + 1]) % (2 * np.pi)
                    del gi[i + 1], th[i + 1]
                else:
                    del gi[i:i + 2], th[i:i + 2]
                changed = True
            else:
                i += 1
        i = 0
        while i < len(gi):
            wrapped = th[i] % (2 * np.pi)
            if (pool.gates[gi[i]].parameterized
                    and min(wrapped, 2 * np.pi - wrapped) < 1e-9):
                del gi[i], th[i]
                changed = True
            else:
                i += 1
    rot_idx = [j for j, g in enumerate(pool.gates) if g.parameterized]
    while len(gi) < seq_len:
        gi.append(int(rng.choice(rot_idx)))
        th.append(0.0)
    return np.array(gi, dtype=int), np.array(th, dtype=float)


def layered_indices(pool: GatePool, num_qubits: int, seq_len: int) -> np.ndarray:
    """Brickwork-flavored starting structure: per qubit an RY then RZ, then
    the pool's CZ gates at alternating parity, cycling until seq_len."""
    by_kind = {}
    for j, g in enumerate(pool.gates):
        by_kind.setdefault((g.kind, g.qubits), j)
    cz = [j for j, g in enumerate(pool.gates) if not g.parameterized]
    out = []
    layer = 0
    while len(out) < seq_len:
        for q in range(num_qubits):
            for kind in ("RY", "RZ"):
                j = by_kind.get((kind, (q,)))
                if j is not None:
                    out.append(j)
        take = cz[layer % 2::2] if len(cz) > 1 else cz
        out.extend(take)
        layer += 1
    return np.array(out[:seq_len], dtype=int)


def _fixed_targets(task: CloneTask, cfg: SearchConfig, rng) -> np.ndarray:
    """One target batch reused for the whole search. Families with a finite
    state set contribute every state once; continuous families are sampled."""
    try:
        finite = task.family.states()
    except ValueError:
        targets, _ = sample_matrix(task.family, cfg.batch_size, rng)
        return targets
    return np.stack([vec for vec, _ in finite], axis=1)


def _train_inner(task, kind, cfg, indices, theta, targets, epochs,
                 best_known, decay: bool):
    seq = GateSequence(cfg.pool, [int(i) for i in indices])
    tc = TrainConfig(
        learning_rate=cfg.learning_rate, epochs=epochs,
        batch_size=targets.shape[1], n_train=targets.shape[1], n_test=1,
        seed=0, patience=cfg.patience, slack=cfg.slack,
        best_known=best_known,
        lr_decay_at=epochs // 2 if decay else None)
    theta2, _ = train(task, seq, theta, kind, tc, targets=targets,
                      test_targets=targets[:, :1])
    return theta2, cost_value(kind, task, seq, theta2, targets)


def search(task: CloneTask, kind: CostKind, cfg: SearchConfig) -> SearchResult:
    """Run the two-loop structure search; deterministic under cfg.seed."""
    ss = np.random.SeedSequence(cfg.seed).spawn(3)
    rng_data = np.random.default_rng(ss[0])
    rng_struct = np.random.default_rng(ss[1])
    rng_fill = np.random.default_rng(ss[2])
    pool = cfg.pool
    targets = _fixed_targets(task, cfg, rng_data)

    if cfg.init_structure == "layered":
        indices = layered_indices(pool, task.total_qubits, cfg.seq_len)
    else:
        indices = rng_struct.integers(len(pool.gates), size=cfg.seq_len)
    theta = np.array([_random_angle(pool.gates[i], rng_struct)
                      for i in indices])

    init_epochs = cfg.init_epochs or cfg.epochs_per_iter
    theta, best = _train_inner(task, kind, cfg, indices, theta, targets,
                               init_epochs, None,
                               decay=cfg.init_epochs is not None)
    best_idx, best_theta = indices.copy(), theta.copy()
    history = [best]
    accepted = 0
    for _ in range(cfg.iterations):
        cand_idx, cand_theta = perturb(best_idx, best_theta, pool, rng_struct)
        if cfg.start == "cold":
            cand_theta = np.array([_random_angle(pool.gates[i], rng_struct)
                                   for i in cand_idx])
        cand_idx, cand_theta = compress(cand_idx, cand_theta, pool, rng_fill,
                                        cfg.seq_len)
        cand_theta, cand_cost = _train_inner(task, kind, cfg, cand_idx,
                                             cand_theta, targets,
                                             cfg.epochs_per_iter, best,
                                             decay=False)
        if cand_cost < best:
            best, best_idx, best_theta = cand_cost, cand_idx, cand_theta
            accepted += 1
        history.append(best)
    if cfg.polish_epochs:
        best_theta, best = _train_inner(task, kind, cfg, best_idx, best_theta,
                                        targets, cfg.polish_epochs, None,
                                        decay=True)
        history.append(best)
    seq = GateSequence(pool, [int(i) for i in best_idx])
    return SearchResult(seq, best_theta, float(best), [float(c) for c in history],
                        seed=cfg.seed, pool_size=len(pool.gates),
                        accepted=accepted)
