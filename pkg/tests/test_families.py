"""Input-state families and the analytic fidelity reference table."""

import math

import numpy as np
import pytest

from vqclone.families import (
    StateFamily,
    asym_fidelity_pair,
    cerf_pc_clone,
    coin_flip_states,
    local_from_global_sdqcm,
    optimal_global_fixed_overlap,
    optimal_local_fixed_overlap,
    optimal_local_universal,
    optimal_phase_covariant,
    phase_covariant_state,
    sample,
    sample_matrix,
)
from vqclone.qmath import fidelity, partial_trace

ROOT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# analytic optima


def test_universal_symmetric_values():
    assert optimal_local_universal(1, 2) == pytest.approx(5 / 6, abs=1e-15)
    assert optimal_local_universal(2, 3) == pytest.approx(11 / 12, abs=1e-15)
    # N -> inf limit is the measure-and-prepare value (M+1)/(M+2)
    assert optimal_local_universal(1, 10**6) == pytest.approx(2 / 3, abs=1e-5)


def test_universal_rejects_bad_counts():
    for m, n in ((0, 2), (3, 1)):
        with pytest.raises(ValueError):
            optimal_local_universal(m, n)
    # m == n is trivial cloning
    assert optimal_local_universal(2, 2) == pytest.approx(1.0, abs=1e-15)


def test_phase_covariant_pair():
    f12, f13 = optimal_phase_covariant()
    assert f12 == pytest.approx(0.5 * (1 + 1 / ROOT2), abs=1e-15)
    assert f13 == pytest.approx(0.72855, abs=5e-4)
    assert f12 > f13
    # equatorial restriction beats the universal cloner at 1 -> 2
    assert f12 > optimal_local_universal(1, 2)


def test_local_fixed_overlap_values():
    # independently tabulated from the closed form
    assert optimal_local_fixed_overlap(0.5) == pytest.approx(0.9871393, abs=1e-6)
    got = optimal_local_fixed_overlap(math.cos(math.pi / 9))
    assert got == pytest.approx(0.9974954, abs=1e-6)
    assert optimal_local_fixed_overlap(1 / ROOT2) == pytest.approx(
        0.9898382, abs=1e-6)


def test_local_fixed_overlap_beats_global_marginal():
    # the dedicated local optimum can't do worse than the per-clone
    # fidelity of the globally optimal transformation
    for s in (0.3, 0.5, 1 / ROOT2, 0.9):
        assert optimal_local_fixed_overlap(s) >= local_from_global_sdqcm(
            s, 1, 2) - 1e-12


def test_global_fixed_overlap_value():
    got = optimal_global_fixed_overlap(1 / ROOT2, 1, 2)
    assert got == pytest.approx(0.983, abs=1e-3)
    s = 1 / ROOT2
    closed = 0.5 * (1 + s**3 + math.sqrt(1 - s**2) * math.sqrt(1 - s**4))
    assert got == pytest.approx(closed, abs=1e-15)


def test_fixed_overlap_monotone_in_s():
    values = [optimal_local_fixed_overlap(s)
              for s in np.linspace(0.05, 0.95, 19)]
    diffs = np.diff(values)
    # fidelity dips to a minimum then climbs back toward 1 at s -> 1
    assert values[0] > 0.9 and values[-1] > 0.99
    assert np.all(np.abs(diffs) < 0.05)


def test_asymmetric_tradeoff_pair():
    f_b, f_e = asym_fidelity_pair(1 / math.sqrt(3))
    assert f_b == pytest.approx(5 / 6, abs=1e-12)
    assert f_e == pytest.approx(5 / 6, abs=1e-12)
    # p = 0 keeps the original perfect, p = 1 swaps it to the other port
    assert asym_fidelity_pair(0.0)[0] == pytest.approx(1.0, abs=1e-12)
    assert asym_fidelity_pair(1.0)[1] == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        asym_fidelity_pair(1.5)


# ---------------------------------------------------------------------------
# state constructions


def test_phase_covariant_state_layout():
    vec = phase_covariant_state(0.7)
    assert vec.shape == (2,)
    assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-12)
    assert abs(vec[0]) == pytest.approx(abs(vec[1]), abs=1e-12)
    assert np.angle(vec[1] / vec[0]) == pytest.approx(0.7, abs=1e-12)


def test_coin_flip_state_overlaps():
    phi = math.pi / 8
    states = coin_flip_states(phi)
    assert set(states) == {(0, 0), (1, 0), (0, 1), (1, 1)}
    v00, v10, v01, v11 = (states[k] for k in ((0, 0), (1, 0), (0, 1), (1, 1)))
    assert abs(np.vdot(v00, v10)) == pytest.approx(math.cos(2 * phi), abs=1e-12)
    assert abs(np.vdot(v00, v11)) == pytest.approx(math.sin(2 * phi), abs=1e-12)
    assert abs(np.vdot(v01, v11)) == pytest.approx(math.cos(2 * phi), abs=1e-12)
    # same-basis partners are orthogonal
    assert abs(np.vdot(v00, v01)) < 1e-12
    assert abs(np.vdot(v10, v11)) < 1e-12


def test_cerf_clone_symmetric_point():
    rho = cerf_pc_clone(math.pi / 4, 0.9)
    target = phase_covariant_state(0.9)
    proj = np.outer(target, target.conj())
    clone_a = partial_trace(rho, [0])
    clone_b = partial_trace(rho, [1])
    want = 0.5 * (1 + 1 / ROOT2)
    assert fidelity(clone_a, proj) == pytest.approx(want, abs=1e-12)
    assert fidelity(clone_b, proj) == pytest.approx(want, abs=1e-12)
    # full 3-qubit output is pure
    assert rho.purity == pytest.approx(1.0, abs=1e-12)


def test_cerf_clone_asymmetry_sweep():
    target = phase_covariant_state(0.3)
    proj = np.outer(target, target.conj())
    for eta in (0.2, 0.7, 1.2):
        rho = cerf_pc_clone(eta, 0.3)
        fa = fidelity(partial_trace(rho, [0]), proj)
        fb = fidelity(partial_trace(rho, [1]), proj)
        assert fa == pytest.approx(0.5 * (1 + math.cos(eta)), abs=1e-12)
        assert fb == pytest.approx(0.5 * (1 + math.sin(eta)), abs=1e-12)
    with pytest.raises(ValueError):
        cerf_pc_clone(2.0, 0.0)


# ---------------------------------------------------------------------------
# family configuration and sampling


def test_family_fixed_overlap_accepts_s_or_phi():
    by_s = StateFamily("FixedOverlap", s=0.5)
    by_phi = StateFamily("FixedOverlap", phi=0.5 * math.asin(0.5))
    assert by_s.s == pytest.approx(by_phi.s, abs=1e-15)
    assert by_s.phi == pytest.approx(by_phi.phi, abs=1e-15)
    with pytest.raises(ValueError):
        StateFamily("FixedOverlap")
    with pytest.raises(ValueError):
        StateFamily("FixedOverlap", s=1.5)


def test_family_defaults_and_unknown_kind():
    assert StateFamily("PhaseCovariant").normalization == pytest.approx(
        4 * math.pi)
    assert StateFamily("FixedOverlap", s=0.5).normalization == pytest.approx(2.0)
    assert StateFamily("CoinFlip4", phi=0.3).normalization == pytest.approx(4.0)
    with pytest.raises(ValueError):
        StateFamily("Haar")
    with pytest.raises(ValueError):
        StateFamily("CoinFlip4", phi=1.0)


def test_finite_state_lists():
    fo = StateFamily("FixedOverlap", s=0.5)
    vecs = fo.states()
    assert len(vecs) == 2
    assert abs(np.vdot(vecs[0][0], vecs[1][0])) == pytest.approx(0.5, abs=1e-12)
    cf = StateFamily("CoinFlip4", phi=math.pi / 8)
    assert len(cf.states()) == 4
    with pytest.raises(ValueError):
        StateFamily("PhaseCovariant").states()


def test_sampling_is_seed_deterministic():
    fam = StateFamily("PhaseCovariant")
    a = sample(fam, 7, 123)
    b = sample(fam, 7, 123)
    c = sample(fam, 7, 124)
    assert all(np.array_equal(x.state, y.state) for x, y in zip(a, b))
    assert not all(np.array_equal(x.state, y.state) for x, y in zip(a, c))


def test_sampling_outputs_are_unit_vectors():
    for fam in (StateFamily("PhaseCovariant"),
                StateFamily("FixedOverlap", s=0.6),
                StateFamily("CoinFlip4", phi=0.3)):
        mat, labels = sample_matrix(fam, 40, 5)
        assert mat.shape == (2, 40)
        assert len(labels) == 40
        norms = np.linalg.norm(mat, axis=0)
        assert np.allclose(norms, 1.0, atol=1e-12)


def test_sampling_covers_finite_labels():
    fam = StateFamily("CoinFlip4", phi=0.3)
    _, labels = sample_matrix(fam, 200, 0)
    assert set(labels) == {(0, 0), (1, 0), (0, 1), (1, 1)}
    with pytest.raises(ValueError):
        sample(fam, 0, 0)
