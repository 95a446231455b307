"""Cost functions, parameter-shift gradients, and variance floors.

Hand oracles use the do-nothing circuit, whose clone fidelities are known
in closed form, so every cost variant is pinned to arithmetic done in the
test itself.
"""

import math

import numpy as np
import pytest

from vqclone.circuit import CloneTask, GatePool, GateSequence, GateSpec, nn_pool
from vqclone.cost import (
    CostKind,
    batch_matrix,
    cost_report,
    cost_sandwich_check,
    cost_value,
    faithfulness_bounds,
    finite_diff_grad,
    grad,
    grad_component,
    gradient_variance_experiment,
    layered_ansatz,
    plateau_lower_bound,
)
from vqclone.families import StateFamily, asym_fidelity_pair, sample_matrix

PC = StateFamily("PhaseCovariant")


def idle_sequence(num_qubits):
    pool = GatePool([GateSpec("RX", (0,))])
    return GateSequence(pool, [0]), np.zeros(1)


def two_column_targets(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, c], [0.0, s]], dtype=complex), (c, s)


# ---------------------------------------------------------------------------
# cost kinds and report plumbing


def test_cost_kind_validation():
    with pytest.raises(ValueError):
        CostKind("Average")
    with pytest.raises(ValueError):
        CostKind.asymmetric(1.5)
    with pytest.raises(ValueError):
        CostKind("Asymmetric")
    assert CostKind.asymmetric(0.3).p == 0.3


def test_batch_matrix_validation():
    with pytest.raises(ValueError):
        batch_matrix(np.zeros((3, 4)))
    with pytest.raises(ValueError):
        batch_matrix([])
    mat = batch_matrix(np.eye(2, dtype=complex))
    assert mat.shape == (2, 2)


# ---------------------------------------------------------------------------
# closed-form values on the do-nothing circuit
#
# With no gates applied, a 1 -> 2 task leaves the register state t (x) |0>,
# so F_0 = 1 and F_1 = |<t|0>|^2 exactly.


def test_local_cost_closed_form():
    task = CloneTask(1, 2, 0, [0, 1], PC)
    seq, theta = idle_sequence(2)
    targets, (c, s) = two_column_targets(0.7)
    rep = cost_report(CostKind.local(), task, seq, theta, targets)
    want = 0.5 * ((1 - 1.0) + (1 - (1 + c * c) / 2))
    assert rep.value == pytest.approx(want, abs=1e-12)
    assert rep.per_clone_fidelities.shape == (2,)
    assert rep.per_clone_fidelities[0] == pytest.approx(1.0, abs=1e-12)
    assert rep.per_clone_fidelities[1] == pytest.approx(
        (1 + c * c) / 2, abs=1e-12)
    assert rep.batch_size == 2


def test_squared_cost_closed_form():
    task = CloneTask(1, 2, 0, [0, 1], PC)
    seq, theta = idle_sequence(2)
    targets, (c, s) = two_column_targets(0.7)
    got = cost_value(CostKind.squared(), task, seq, theta, targets)
    # column 1: all fidelities 1 -> 0; column 2: s^4 + s^4
    assert got == pytest.approx(0.5 * 2 * s**4, abs=1e-12)


def test_global_cost_closed_form():
    task = CloneTask(1, 2, 0, [0, 1], PC)
    seq, theta = idle_sequence(2)
    targets, (c, s) = two_column_targets(0.7)
    got = cost_value(CostKind.global_(), task, seq, theta, targets)
    assert got == pytest.approx(0.5 * ((1 - 1.0) + (1 - c * c)), abs=1e-12)


def test_asymmetric_cost_closed_form():
    p = 1 / math.sqrt(3)
    task = CloneTask(1, 2, 0, [0, 1], PC)
    seq, theta = idle_sequence(2)
    targets, (c, s) = two_column_targets(0.7)
    t_b, t_e = asym_fidelity_pair(p)
    f0 = np.array([1.0, 1.0])
    f1 = np.array([1.0, c * c])
    want = ((t_b - f0) ** 2).mean() + ((t_e - f1) ** 2).mean()
    got = cost_value(CostKind.asymmetric(p), task, seq, theta, targets)
    assert got == pytest.approx(want, abs=1e-12)


def test_asymmetric_rejects_three_clones():
    task = CloneTask(1, 3, 0, [0, 1, 2], PC)
    seq, theta = idle_sequence(3)
    targets, _ = sample_matrix(PC, 3, 0)
    with pytest.raises(ValueError):
        cost_value(CostKind.asymmetric(0.5), task, seq, theta, targets)


# ---------------------------------------------------------------------------
# gradients


def test_gradient_matches_hand_derivative():
    # single RX on the first clone register; target |0>:
    # C_L(t) = sin^2(t/2)/2, so dC/dt = sin(t)/4
    task = CloneTask(1, 2, 0, [0, 1], PC)
    pool = GatePool([GateSpec("RX", (0,))])
    seq = GateSequence(pool, [0])
    targets = np.array([[1.0], [0.0]], dtype=complex)
    for t in (0.0, 0.4, 1.3, 2.9):
        g = grad(CostKind.local(), task, seq, np.array([t]), targets)
        assert g[0] == pytest.approx(math.sin(t) / 4, abs=1e-12)


def test_parameter_shift_agrees_with_finite_difference():
    rng = np.random.default_rng(11)
    pool = nn_pool(3)
    kinds = [CostKind.local(), CostKind.squared(), CostKind.global_(),
             CostKind.asymmetric(0.4)]
    task = CloneTask(1, 2, 1, [0, 1], PC)
    for i in range(8):
        g_idx = [int(rng.integers(len(pool))) for _ in range(10)]
        seq = GateSequence(pool, g_idx)
        theta = np.where(seq.parameterized_mask(),
                         rng.uniform(0, 2 * np.pi, 10), 0.0)
        targets, _ = sample_matrix(PC, 4, rng)
        kind = kinds[i % len(kinds)]
        ps = grad(kind, task, seq, theta, targets)
        fd = finite_diff_grad(kind, task, seq, theta, targets)
        assert np.max(np.abs(ps - fd)) < 1e-7


def test_gradient_zero_on_unparameterized_positions():
    task = CloneTask(1, 2, 0, [0, 1], PC)
    pool = GatePool([GateSpec("RY", (0,)), GateSpec("CZ", (0, 1))])
    seq = GateSequence(pool, [0, 1])
    targets, _ = sample_matrix(PC, 3, 2)
    g = grad(CostKind.local(), task, seq, np.array([0.3, 0.0]), targets)
    assert g.shape == (2,)
    assert g[1] == 0.0


def test_grad_component_matches_full_gradient():
    task = CloneTask(1, 2, 1, [0, 1], PC)
    seq, theta0 = layered_ansatz(3, 2)
    rng = np.random.default_rng(3)
    theta = np.where(seq.parameterized_mask(),
                     rng.uniform(0, 2 * np.pi, len(seq)), 0.0)
    targets, _ = sample_matrix(PC, 5, 4)
    full = grad(CostKind.local(), task, seq, theta, targets)
    for pos in (0, 3, len(seq) - 1):
        one = grad_component(CostKind.local(), task, seq, theta, targets, pos)
        assert one == pytest.approx(full[pos], abs=1e-12)


# ---------------------------------------------------------------------------
# orderings


def test_local_global_sandwich_random_circuits():
    rng = np.random.default_rng(7)
    for n_out, anc in ((2, 1), (3, 0), (3, 1)):
        task = CloneTask(1, n_out, anc, list(range(n_out)), PC)
        pool = nn_pool(task.total_qubits)
        for _ in range(5):
            g_idx = [int(rng.integers(len(pool))) for _ in range(12)]
            seq = GateSequence(pool, g_idx)
            theta = np.where(seq.parameterized_mask(),
                             rng.uniform(0, 2 * np.pi, 12), 0.0)
            targets, _ = sample_matrix(PC, 6, rng)
            c_l, c_g, holds = cost_sandwich_check(task, seq, theta, targets)
            assert holds, (c_l, c_g)
            assert c_l <= c_g + 1e-9 <= n_out * c_l + 2e-9


# ---------------------------------------------------------------------------
# variance floor and faithfulness


def test_plateau_bound_value():
    assert plateau_lower_bound(1, 2) == pytest.approx(1 / 216, abs=1e-18)
    assert plateau_lower_bound(2, 2) == pytest.approx(1 / 648, abs=1e-18)
    assert plateau_lower_bound(1, 2, block_k=1) == pytest.approx(
        2 / (3**4 * 8), abs=1e-18)
    # decays with depth, decays with clone count
    assert plateau_lower_bound(5, 2) < plateau_lower_bound(1, 2)
    assert plateau_lower_bound(1, 4) < plateau_lower_bound(1, 2)


def test_gradient_variance_experiment_smoke():
    var, bound = gradient_variance_experiment(2, 1, n_samples=40,
                                              seed=0, batch_size=8)
    assert bound == pytest.approx(1 / 216, abs=1e-18)
    assert math.isfinite(var) and var > 0


def test_faithfulness_constant():
    f_opt = 0.5 * (1 + 1 / math.sqrt(2))
    eps = 1e-3
    b = faithfulness_bounds(eps, f_opt, 4 * math.pi, CostKind.squared())
    assert b.f1 / eps == pytest.approx(56.93085, abs=1e-4)
    assert b.fs_bound == b.f1 and b.tr_bound == b.g1
    b2 = faithfulness_bounds(eps, f_opt, 4 * math.pi, CostKind.local())
    assert b2.f2 == pytest.approx(4 * math.pi * eps / math.sin(f_opt),
                                  abs=1e-12)
    assert b2.fs_bound == b2.f2


def test_faithfulness_bounds_shrink_with_epsilon():
    big = faithfulness_bounds(1e-2, 0.8, 2.0, CostKind.local())
    small = faithfulness_bounds(1e-4, 0.8, 2.0, CostKind.local())
    assert small.f2 < big.f2
    # the trace bound's epsilon term carries sign (1 - 2 f_opt): below
    # f_opt = 1/2 it grows with epsilon
    lo = faithfulness_bounds(1e-4, 0.3, 2.0, CostKind.local())
    hi = faithfulness_bounds(1e-2, 0.3, 2.0, CostKind.local())
    assert lo.g2 < hi.g2


def test_faithfulness_validation():
    with pytest.raises(ValueError):
        faithfulness_bounds(-1e-3, 0.8, 2.0, CostKind.local())
    with pytest.raises(ValueError):
        faithfulness_bounds(1e-3, 1.0, 2.0, CostKind.local())
    with pytest.raises(ValueError):
        faithfulness_bounds(1e-3, 0.8, 2.0, CostKind.asymmetric(0.5))
