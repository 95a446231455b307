"""Adam training loop, shot-based fidelity estimation, and sample planning.

Training draws a train/test split from the task's family under named
sub-streams of the config seed, takes parameter-shift gradient steps on a
per-epoch minibatch, and returns the best parameters seen by training cost.
The optional early-stop rule ends a run that is still more than ``slack``
above a known reference cost after ``patience`` epochs; structure search
uses it to cut hopeless candidates short.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from vqclone.circuit import CloneTask, GateSequence
from vqclone.cost import CostKind, batch_matrix, cost_value, grad
from vqclone.families import sample_matrix


@dataclass
class TrainConfig:
    learning_rate: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    epochs: int = 100
    batch_size: int = 10
    n_train: int = 24
    n_test: int = 8
    seed: int = 0
    estimator: str = "exact"  # "exact" | "shots"
    shots: int | None = None  # per-fidelity repetitions when estimator="shots"
    patience: int = 30
    slack: float = 0.02
    best_known: float | None = None  # reference cost for early stopping
    lr_decay_at: int | None = None  # epoch after which lr is divided by 5

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.estimator not in ("exact", "shots"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.estimator == "shots" and not self.shots:
            raise ValueError("shots estimator needs a shot count")


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    learning_rate: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @staticmethod
    def fresh(n_params: int, cfg: TrainConfig | None = None) -> "AdamState":
        cfg = cfg or TrainConfig()
        return AdamState(np.zeros(n_params), np.zeros(n_params), 0,
                         cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps_adam)


def adam_step(theta: np.ndarray, g: np.ndarray,
              state: AdamState) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update; zero-gradient slots stay put."""
    t = state.t + 1
    m = state.beta1 * state.m + (1 - state.beta1) * g
    v = state.beta2 * state.v + (1 - state.beta2) * g * g
    m_hat = m / (1 - state.beta1 ** t)
    v_hat = v / (1 - state.beta2 ** t)
    theta2 = theta - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
    return theta2, AdamState(m, v, t, state.learning_rate, state.beta1,
                             state.beta2, state.eps)


@dataclass
class TrainTrace:
    epochs: list[int] = field(default_factory=list)
    cost_train: list[float] = field(default_factory=list)
    cost_test: list[float] = field(default_factory=list)
    clone_fidelities: list[np.ndarray] = field(default_factory=list)

    def append(self, epoch, c_train, c_test, fids):
        self.epochs.append(int(epoch))
        self.cost_train.append(float(c_train))
        self.cost_test.append(float(c_test))
        self.clone_fidelities.append(np.asarray(fids))

    def __len__(self):
        return len(self.epochs)

    def to_csv(self, path) -> None:
        n = len(self.clone_fidelities[0]) if self.clone_fidelities else 0
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch", "cost_train", "cost_test"]
                       + [f"F_clone_{j + 1}" for j in range(n)])
            for i in range(len(self.epochs)):
                w.writerow([self.epochs[i], repr(self.cost_train[i]),
                            repr(self.cost_test[i])]
                           + [repr(float(f)) for f in self.clone_fidelities[i]])


def _substreams(seed, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def _mean_fids(task, seq, theta, targets) -> np.ndarray:
    from vqclone.cost import _local_fids
    return _local_fids(task, seq, theta, targets).mean(axis=1)


def train(task: CloneTask, seq: GateSequence, theta0, kind: CostKind,
          cfg: TrainConfig, targets=None,
          test_targets=None) -> tuple[np.ndarray, TrainTrace]:
    """Minimize the chosen cost over theta; returns best theta by training
    cost plus the per-epoch trace.

    `targets` (a 2 x K column matrix) overrides family sampling; structure
    search passes one shared batch so candidate costs stay comparable."""
    rng_data, rng_batch, rng_shots = _substreams(cfg.seed, 3)
    if targets is None:
        train_targets, _ = sample_matrix(task.family, cfg.n_train, rng_data)
    else:
        train_targets = np.asarray(targets)
    if test_targets is None:
        test_targets, _ = sample_matrix(task.family, max(cfg.n_test, 1),
                                        rng_data)
    else:
        test_targets = np.asarray(test_targets)

    def measure(theta, targets):
        if cfg.estimator == "shots":
            return _noisy_cost(kind, task, seq, theta, targets, cfg.shots,
                               rng_shots)
        return cost_value(kind, task, seq, theta, targets)

    theta = np.asarray(theta0, dtype=float).copy()
    state = AdamState.fresh(len(theta), cfg)
    trace = TrainTrace()
    best_theta = theta.copy()
    best_cost = measure(theta, train_targets)
    for epoch in range(1, cfg.epochs + 1):
        n_avail = train_targets.shape[1]
        if cfg.batch_size < n_avail:
            idx = rng_batch.choice(n_avail, size=cfg.batch_size, replace=False)
            minibatch = train_targets[:, idx]
        else:
            minibatch = train_targets
        g = grad(kind, task, seq, theta, minibatch)
        if cfg.lr_decay_at is not None and epoch == cfg.lr_decay_at:
            state.learning_rate /= 5
        theta, state = adam_step(theta, g, state)
        c_train = measure(theta, train_targets)
        c_test = measure(theta, test_targets)
        if not (math.isfinite(c_train) and math.isfinite(c_test)):
            raise RuntimeError(
                f"non-finite cost at epoch {epoch}: train={c_train}, "
                f"test={c_test}; aborting")
        trace.append(epoch, c_train, c_test,
                     _mean_fids(task, seq, theta, train_targets))
        if c_train < best_cost:
            best_cost = c_train
            best_theta = theta.copy()
        if (cfg.best_known is not None and epoch >= cfg.patience
                and best_cost > cfg.best_known + cfg.slack):
            break
    return best_theta, trace


def _swap_draws(fids: np.ndarray, shots: int, rng) -> np.ndarray:
    """Replace each exact fidelity by a SWAP-test estimate with `shots`
    repetitions: outcome '1' has probability (1-F)/2, F_hat = 1 - 2 ones/shots."""
    p_one = np.clip(0.5 * (1.0 - fids), 0.0, 1.0)
    ones = rng.binomial(shots, p_one)
    return 1.0 - 2.0 * ones / shots


def _noisy_cost(kind, task, seq, theta, targets, shots, rng) -> float:
    """Cost recombined from shot-estimated fidelities. Gradients are still
    exact parameter-shift; only the traced/early-stop costs carry noise."""
    from vqclone.cost import _global_fids, _local_fids
    from vqclone.families import asym_fidelity_pair
    if kind.variant == "Global":
        g = _swap_draws(_global_fids(task, seq, theta, targets), shots, rng)
        return float(1.0 - g.mean())
    fids = _swap_draws(_local_fids(task, seq, theta, targets), shots, rng)
    if kind.variant == "Local":
        return float(1.0 - fids.mean())
    if kind.variant == "Squared":
        from vqclone.cost import _squared_value
        return float(_squared_value(fids).mean())
    t_b, t_e = asym_fidelity_pair(kind.p)
    return float(((fids[0] - t_b) ** 2).mean() + ((fids[1] - t_e) ** 2).mean())


def swap_test_estimate(pure, rho, shots: int, seed) -> float:
    """Overlap estimate from simulated SWAP-test outcomes.

    The test yields outcome '1' with probability (1 - <phi|rho|phi>)/2; the
    estimate is 1 - 2 * (#ones / shots). Simulated at the probability level,
    which has statistics identical to the explicit circuit.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    from vqclone.qmath import _mat
    phi = pure.amplitudes if hasattr(pure, "amplitudes") else np.asarray(pure)
    overlap = float(np.real(phi.conj() @ _mat(rho) @ phi))
    p_one = 0.5 * (1 - overlap)
    p_one = min(max(p_one, 0.0), 1.0)
    rng = np.random.default_rng(seed)
    ones = rng.binomial(shots, p_one)
    return 1.0 - 2.0 * ones / shots


@dataclass
class SamplePlan:
    gamma: float
    delta: float
    total_samples: int


def plan_samples(gamma: float, delta: float) -> SamplePlan:
    """Hoeffding sample count ceil(ln(2/delta) / (2 gamma^2)) for an additive
    gamma-accurate cost estimate with confidence 1-delta. The split into
    (states) x (repetitions per state) is the caller's choice."""
    if not 0 < gamma < 1 or not 0 < delta < 1:
        raise ValueError("gamma and delta must lie in (0,1)")
    total = math.ceil(math.log(2 / delta) / (2 * gamma * gamma))
    return SamplePlan(gamma, delta, total)
