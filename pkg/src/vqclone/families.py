"""Input-state families, samplers, and closed-form optimal-fidelity anchors.

Three families:

* ``PhaseCovariant`` — equatorial states (|0> + e^{i eta}|1>)/sqrt(2),
  eta uniform on [0, 2pi).
* ``FixedOverlap`` — the mirror pair cos(phi)|0>+sin(phi)|1> and
  sin(phi)|0>+cos(phi)|1>, overlap s = sin(2 phi).
* ``CoinFlip4`` — the four states used by the coin-flipping protocols,
  indexed by bits (x, a); see ``coin_flip_states``.

``normalization`` is the measure of the family's state set (4pi for the
phase-covariant circle, the set size for finite families); it is the N
constant appearing in the faithfulness bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from vqclone.qmath import DensityMatrix

PHASE_COVARIANT = "PhaseCovariant"
FIXED_OVERLAP = "FixedOverlap"
COIN_FLIP4 = "CoinFlip4"


@dataclass
class StateFamily:
    kind: str
    phi: float | None = None
    s: float | None = None
    normalization: float = field(default=None)

    def __post_init__(self):
        if self.kind == PHASE_COVARIANT:
            if self.normalization is None:
                self.normalization = 4 * math.pi
        elif self.kind == FIXED_OVERLAP:
            # accept either the overlap s or the angle phi (s = sin 2phi)
            if self.s is None and self.phi is None:
                raise ValueError("FixedOverlap needs s or phi")
            if self.s is None:
                self.s = math.sin(2 * self.phi)
            elif self.phi is None:
                self.phi = 0.5 * math.asin(self.s)
            if not 0 < self.s < 1:
                raise ValueError(f"overlap s={self.s} outside (0,1)")
            if self.normalization is None:
                self.normalization = 2.0
        elif self.kind == COIN_FLIP4:
            if self.phi is None:
                raise ValueError("CoinFlip4 needs phi")
            if not 0 < self.phi < math.pi / 4:
                raise ValueError(f"phi={self.phi} outside (0, pi/4)")
            if self.normalization is None:
                self.normalization = 4.0
        else:
            raise ValueError(f"unknown family kind {self.kind!r}")

    def states(self) -> list[tuple[np.ndarray, object]]:
        """The family's finite state set as (vector, label) pairs.

        Raises for the continuous phase-covariant family.
        """
        if self.kind == FIXED_OVERLAP:
            c, s = math.cos(self.phi), math.sin(self.phi)
            return [(np.array([c, s], dtype=complex), 0),
                    (np.array([s, c], dtype=complex), 1)]
        if self.kind == COIN_FLIP4:
            return [(vec, key) for key, vec in coin_flip_states(self.phi).items()]
        raise ValueError("continuous family has no finite state list")


@dataclass
class StateSample:
    state: np.ndarray
    label: object


def phase_covariant_state(eta: float) -> np.ndarray:
    return np.array([1.0, np.exp(1j * eta)], dtype=complex) / math.sqrt(2)


def coin_flip_states(phi: float) -> dict[tuple[int, int], np.ndarray]:
    """The four protocol states, keyed by (x, a).

    (0,0) -> (cos, sin); (1,0) -> (cos, -sin); (0,1) -> (sin, -cos);
    (1,1) -> (sin, cos). Overlaps: |<phi_00|phi_10>| = cos 2phi,
    |<phi_00|phi_11>| = sin 2phi, and the a=0 pair is orthogonal to its
    a=1 partner with the same x.
    """
    c, s = math.cos(phi), math.sin(phi)
    return {
        (0, 0): np.array([c, s], dtype=complex),
        (1, 0): np.array([c, -s], dtype=complex),
        (0, 1): np.array([s, -c], dtype=complex),
        (1, 1): np.array([s, c], dtype=complex),
    }


def sample(family: StateFamily, count: int, seed) -> list[StateSample]:
    """Draw ``count`` states; uniform over the family, fixed by ``seed``.

    ``seed`` may be an int or a numpy Generator/SeedSequence.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    if family.kind == PHASE_COVARIANT:
        etas = rng.uniform(0.0, 2 * math.pi, size=count)
        return [StateSample(phase_covariant_state(e), float(e)) for e in etas]
    pool = family.states()
    picks = rng.integers(len(pool), size=count)
    return [StateSample(pool[i][0].copy(), pool[i][1]) for i in picks]


def sample_matrix(family: StateFamily, count: int, seed) -> tuple[np.ndarray, list]:
    """Samples as a (2, count) column matrix plus labels (batched fast path)."""
    draws = sample(family, count, seed)
    mat = np.stack([d.state for d in draws], axis=1)
    return mat, [d.label for d in draws]


# ---------------------------------------------------------------------------
# closed-form optima


def optimal_local_universal(m: int, n: int) -> float:
    """Optimal per-clone fidelity for universal M -> N cloning."""
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    return m / n + (n - m) * (m + 1) / (n * (m + 2))


def optimal_local_fixed_overlap(s: float) -> float:
    """Optimal per-clone fidelity for 1 -> 2 cloning of a fixed-overlap pair."""
    if not 0 < s < 1:
        raise ValueError("s outside (0,1)")
    r = math.sqrt(1 - 2 * s + 9 * s * s)
    inner = -1 + 2 * s + 3 * s * s + (1 - s) * r
    return 0.5 + math.sqrt(2) / (32 * s) * (1 + s) * (3 - 3 * s + r) * math.sqrt(inner)


def optimal_global_fixed_overlap(s: float, m: int, n: int) -> float:
    """Optimal joint-output fidelity for M -> N fixed-overlap cloning."""
    if not 0 < s < 1:
        raise ValueError("s outside (0,1)")
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    return 0.5 * (1 + s ** (m + n)
                  + math.sqrt(1 - s ** (2 * m)) * math.sqrt(1 - s ** (2 * n)))


def local_from_global_sdqcm(s: float, m: int, n: int) -> float:
    """Per-clone fidelity delivered by the globally optimal fixed-overlap
    cloner (a lower bound on the local optimum at M=1, N=2)."""
    if not 0 < s < 1:
        raise ValueError("s outside (0,1)")
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    sm, sn = s ** m, s ** n
    return 0.25 * ((1 + sm) / (1 + sn) * (1 + s * s + 2 * sn)
                   + (1 - sm) / (1 - sn) * (1 + s * s - 2 * sn)
                   + 2 * (1 - s ** (2 * m)) / (1 - s ** (2 * n)) * (1 - s * s))


def optimal_phase_covariant() -> tuple[float, float]:
    """(local, global) optimal fidelities for symmetric 1 -> 2 cloning of
    equatorial states."""
    f_local = 0.5 * (1 + 1 / math.sqrt(2))
    f_global = (1 + math.sqrt(2)) ** 2 / 8
    return f_local, f_global


def asym_fidelity_pair(p: float) -> tuple[float, float]:
    """Fidelity pair (F_B, F_E) saturating the asymmetric no-cloning
    trade-off at parameter p; p = 1/sqrt(3) gives the symmetric 5/6 point."""
    if not 0 <= p <= 1:
        raise ValueError("p outside [0,1]")
    f_b = 1 - p * p / 2
    f_e = 1 - 0.25 * (2 - p * p - p * math.sqrt(4 - 3 * p * p))
    return f_b, f_e


def cerf_pc_clone(eta: float, input_phase: float) -> DensityMatrix:
    """Reference symmetric cloner output for an equatorial input.

    Returns the pure 3-qubit output (clone A = qubit 0, clone B = qubit 1,
    ancilla = qubit 2) of the analytic phase-covariant transformation with
    asymmetry angle ``eta``; eta = pi/4 is the symmetric point where both
    clones sit at fidelity (1 + 1/sqrt(2))/2.
    """
    if not 0 <= eta <= math.pi / 2:
        raise ValueError("eta outside [0, pi/2]")
    e = np.exp(1j * input_phase)
    c, s = math.cos(eta), math.sin(eta)
    vec = np.zeros(8, dtype=complex)
    vec[0b000] = 1.0
    vec[0b010] = e * s
    vec[0b100] = e * c
    vec[0b111] = e
    vec[0b011] = c
    vec[0b101] = s
    vec *= 0.5
    return DensityMatrix(np.outer(vec, vec.conj()), 3)
