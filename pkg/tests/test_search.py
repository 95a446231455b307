"""Structure search: proposal moves, circuit compression, acceptance."""

import importlib

import numpy as np
import pytest

search_mod = importlib.import_module("vqclone.search")
SearchConfig = search_mod.SearchConfig
compress = search_mod.compress
draw_d = search_mod.draw_d
layered_indices = search_mod.layered_indices
perturb = search_mod.perturb
search = search_mod.search

from vqclone.circuit import CloneTask, GateSequence, build_unitary, nn_pool, pc_pool
from vqclone.cost import CostKind
from vqclone.families import StateFamily


def unitary_of(pool, indices, theta):
    seq = GateSequence(pool, [int(i) for i in indices])
    n = 1 + max(q for g in pool.gates for q in g.qubits)
    return build_unitary(seq, np.asarray(theta, dtype=float), n)


def phase_aligned_close(u, v, atol=1e-9):
    k = np.unravel_index(np.argmax(np.abs(u)), u.shape)
    phase = v[k] / u[k]
    return abs(abs(phase) - 1) < atol and np.allclose(u * phase, v, atol=atol)


# ---------------------------------------------------------------------------
# proposal distribution


def test_draw_d_distribution():
    rng = np.random.default_rng(0)
    draws = [draw_d(6, rng) for _ in range(4000)]
    freq1 = draws.count(1) / len(draws)
    assert 0.46 < freq1 < 0.54  # Pr(d=1) = 1/2
    assert min(draws) >= 0 and max(draws) <= 6
    # leftover mass on 0 is 2^-6, rare but possible
    assert draws.count(0) < 200


def test_perturb_changes_at_most_d_positions():
    pool = nn_pool(3)
    rng = np.random.default_rng(5)
    indices = np.zeros(10, dtype=int)
    theta = np.zeros(10)
    for _ in range(50):
        new_i, new_t = perturb(indices, theta, pool, rng)
        changed = int(np.sum(new_i != indices))
        assert changed <= 10
        # original buffers untouched
        assert np.array_equal(indices, np.zeros(10, dtype=int))
        if changed:
            pos = np.nonzero(new_i != indices)[0]
            for p in pos:
                assert 0 <= new_i[p] < len(pool.gates)


# ---------------------------------------------------------------------------
# compression


def test_compress_merges_adjacent_rotations():
    pool = pc_pool()
    # find two pool slots for the same rotation to make adjacency explicit
    rx0 = next(j for j, g in enumerate(pool.gates)
               if g.kind == "RX" and g.qubits == (0,))
    rng = np.random.default_rng(1)
    indices = np.array([rx0, rx0, rx0])
    theta = np.array([0.4, 0.5, 0.6])
    new_i, new_t = compress(indices, theta, pool, rng)
    u_before = unitary_of(pool, indices, theta)
    u_after = unitary_of(pool, new_i, new_t)
    assert phase_aligned_close(u_before, u_after)
    assert len(new_i) == 3  # padded back to the original length
    # merged content: exactly one non-zero angle summing 1.5
    nz = new_t[np.abs(new_t) > 1e-12]
    assert len(nz) == 1 and nz[0] == pytest.approx(1.5)


def test_compress_cancels_cz_pairs_and_null_rotations():
    pool = nn_pool(2)
    cz = next(j for j, g in enumerate(pool.gates) if not g.parameterized)
    ry1 = next(j for j, g in enumerate(pool.gates)
               if g.kind == "RY" and g.qubits == (1,))
    rng = np.random.default_rng(2)
    indices = np.array([cz, cz, ry1, ry1])
    theta = np.array([0.0, 0.0, 1.0, -1.0])
    new_i, new_t = compress(indices, theta, pool, rng)
    u = unitary_of(pool, new_i, new_t)
    assert phase_aligned_close(u, np.eye(4, dtype=complex))
    # every surviving slot is a rotation at angle 0 (cost-neutral filler)
    for j, t in zip(new_i, new_t):
        assert pool.gates[j].parameterized
        assert t == pytest.approx(0.0)


def test_compress_random_circuits_preserve_unitary():
    pool = nn_pool(3)
    rng = np.random.default_rng(9)
    for _ in range(20):
        n = 12
        indices = rng.integers(len(pool.gates), size=n)
        theta = np.where([pool.gates[i].parameterized for i in indices],
                         rng.uniform(0, 2 * np.pi, n), 0.0)
        new_i, new_t = compress(indices, theta, pool, rng)
        assert len(new_i) == n
        u, v = unitary_of(pool, indices, theta), unitary_of(pool, new_i, new_t)
        assert phase_aligned_close(u, v)


def test_layered_indices_cover_rotations_then_entanglers():
    pool = nn_pool(3)
    idx = layered_indices(pool, 3, 8)
    assert len(idx) == 8
    kinds = [pool.gates[j].kind for j in idx]
    # one RY + RZ pair per qubit first
    assert kinds[:6] == ["RY", "RZ", "RY", "RZ", "RY", "RZ"]
    assert all(0 <= j < len(pool.gates) for j in idx)


# ---------------------------------------------------------------------------
# the search loop


def small_search(seed=0, iterations=4):
    fam = StateFamily("FixedOverlap", s=0.5)
    task = CloneTask(1, 2, 1, [0, 1], fam)
    cfg = SearchConfig(seq_len=8, pool=nn_pool(3), iterations=iterations,
                       epochs_per_iter=12, seed=seed)
    return search(task, CostKind.local(), cfg)


def test_search_history_is_monotone():
    res = small_search()
    hist = res.cost_history
    assert len(hist) >= 2
    assert all(b <= a + 1e-12 for a, b in zip(hist, hist[1:]))
    assert res.best_cost == pytest.approx(hist[-1])
    assert 0 <= res.best_cost < 0.5


def test_search_is_deterministic_and_seed_sensitive():
    a = small_search(seed=1, iterations=3)
    b = small_search(seed=1, iterations=3)
    c = small_search(seed=2, iterations=3)
    assert a.best_cost == b.best_cost
    assert np.array_equal(a.best_theta, b.best_theta)
    assert a.cost_history == b.cost_history
    assert (c.best_cost != a.best_cost) or (c.cost_history != a.cost_history)


def test_search_result_contents():
    res = small_search(iterations=3)
    assert len(res.best_seq) == 8
    assert res.best_theta.shape == (8,)
    assert res.pool_size == len(nn_pool(3).gates)
    s = res.summary()
    assert set(s) == {"best_cost", "iterations", "accepted", "seed",
                      "pool_size"}
    assert s["accepted"] <= s["iterations"]


def test_search_config_validation():
    pool = nn_pool(3)
    with pytest.raises(ValueError):
        SearchConfig(seq_len=0, pool=pool)
    with pytest.raises(ValueError):
        SearchConfig(seq_len=5, pool=pool, iterations=0)
    with pytest.raises(ValueError):
        SearchConfig(seq_len=5, pool=pool, accept_rule="metropolis")
    with pytest.raises(ValueError):
        SearchConfig(seq_len=5, pool=pool, start="tepid")
    with pytest.raises(ValueError):
        SearchConfig(seq_len=5, pool=pool, init_structure="ladder")
