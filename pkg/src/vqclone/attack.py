"""Cloning-based cheating strategies against the two coin-flip protocols.

The first protocol commits a bit in one of two non-orthogonal states; the
cheating receiver clones the commitment qubit, returns one copy, and later
discriminates between the two consistent histories. The second protocol uses
four states; the receiver either discriminates the global two-copy output of
a cloner (model I) or per-copy ensembles (model II). Ideal-cloner numbers
come from closed forms, learned numbers from measuring circuit outputs.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from vqclone.circuit import CloneTask, GateSequence, prepare_input, run_sequence
from vqclone.families import (
    StateFamily,
    coin_flip_states,
    optimal_local_fixed_overlap,
)
from vqclone.qmath import DensityMatrix, _mat, fidelity, partial_trace

_SYM = [np.array([1, 0, 0, 0.0]),
        np.array([0, 1, 1, 0.0]) / np.sqrt(2),
        np.array([0, 0, 0, 1.0])]


# ---------------------------------------------------------------------------
# discrimination primitives


def helstrom(rho1, rho2, prior: float = 0.5) -> float:
    """Best single-shot discrimination success probability.

    For priors (p, 1-p): 1/2 + 1/2 ||p rho1 - (1-p) rho2||_tr, which reduces
    to 1/2 + 1/4 ||rho1 - rho2||_tr at equal priors.
    """
    m1, m2 = _mat(rho1), _mat(rho2)
    if m1.shape != m2.shape:
        raise ValueError(f"dim mismatch {m1.shape} vs {m2.shape}")
    if not 0 <= prior <= 1:
        raise ValueError("prior must lie in [0,1]")
    w = np.linalg.eigvalsh(prior * m1 - (1 - prior) * m2)
    return float(0.5 + 0.5 * np.abs(w).sum())


def neumark(u1, u2):
    """Orthonormal measurement pair straddling two real unit vectors
    symmetrically; optimal for discriminating them with equal priors."""
    b = u1 + u2
    b = b / np.linalg.norm(b)
    d = u1 - u2
    d = d / np.linalg.norm(d)
    return (b + d) / np.sqrt(2), (b - d) / np.sqrt(2)


def majority_vote_success(p: float, n: int) -> float:
    """Success of n independent trials decided by majority; ties (even n)
    are resolved by a fair coin."""
    if n < 1:
        raise ValueError("n must be >= 1")
    total = 0.0
    for k in range(n + 1):
        pk = math.comb(n, k) * p ** k * (1 - p) ** (n - k)
        if 2 * k > n:
            total += pk
        elif 2 * k == n:
            total += 0.5 * pk
    return float(total)


# ---------------------------------------------------------------------------
# cloner handles


@dataclass
class AttackReport:
    p_disc: float
    bias: float
    p_detect: float
    p_succ_overall: float
    n_rounds: int = 1
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("p_disc", "p_detect", "p_succ_overall"):
            v = getattr(self, name)
            if not -1e-9 <= v <= 1 + 1e-9:
                raise ValueError(f"{name}={v} outside [0,1]")

    def to_json(self) -> str:
        payload = {k: getattr(self, k) for k in
                   ("p_disc", "bias", "p_detect", "p_succ_overall", "n_rounds")}
        payload["extras"] = {k: (float(v) if np.isscalar(v) else v)
                             for k, v in self.extras.items()}
        return json.dumps(payload, indent=1)


def _pair_outputs_sym(s: float, mode: str):
    """Optimal symmetric 1->2 cloner outputs for a two-state set with real
    overlap s, in the frame where the pair is (c, t) and (c, -t).

    Both outputs live in the triplet (exchange-symmetric) subspace; the
    second is Z(x)Z times the first, which pins their overlap to s as a
    unitary extension requires. The free angle is chosen to maximize the
    per-clone fidelity (mode "local") or the two-copy overlap with the
    perfect product target (mode "global").
    """
    c = math.cos(0.5 * math.acos(s))
    t = math.sin(0.5 * math.acos(s))
    u = np.array([c, t])
    y0 = math.sqrt((1 - s) / 2)
    r = math.sqrt((1 + s) / 2)
    uu = np.kron(u, u)

    def candidates(ts):
        # columns: amplitudes (x, y0, z) over the symmetric basis
        xs, zs = r * np.cos(ts), r * np.sin(ts)
        vecs = (xs[None, :] * _SYM[0][:, None]
                + y0 * _SYM[1][:, None]
                + zs[None, :] * _SYM[2][:, None])
        if mode == "global":
            return (uu @ vecs) ** 2
        v3 = vecs.reshape(2, 2, -1)
        fa = np.einsum("a,abk,cbk,c->k", u, v3, v3, u)
        fb = np.einsum("b,abk,ack,c->k", u, v3, v3, u)
        return 0.5 * (fa + fb)

    ts = np.linspace(0, 2 * np.pi, 20001)
    vals = candidates(ts)
    k = int(np.argmax(vals))
    lo, hi = ts[max(k - 1, 0)], ts[min(k + 1, len(ts) - 1)]
    ts2 = np.linspace(lo, hi, 20001)
    vals2 = candidates(ts2)
    k2 = int(np.argmax(vals2))
    tstar = ts2[k2]
    alpha0 = (r * math.cos(tstar) * _SYM[0] + y0 * _SYM[1]
              + r * math.sin(tstar) * _SYM[2])
    zz = np.kron(np.diag([1, -1.0]), np.diag([1, -1.0]))
    return u, alpha0, zz @ alpha0, float(vals2[k2])


@dataclass
class ClonerHandle:
    """Either closed-form reference outputs or a trained circuit."""

    source: str  # "Analytic" | "Learned"
    family: StateFamily
    seq: GateSequence | None = None
    theta: np.ndarray | None = None
    task: CloneTask | None = None

    def __post_init__(self):
        if self.source not in ("Analytic", "Learned"):
            raise ValueError(f"unknown cloner source {self.source!r}")
        if self.source == "Learned" and (self.seq is None or self.task is None):
            raise ValueError("Learned cloner needs seq, theta, and task")

    def outputs(self, vec) -> tuple[list[DensityMatrix], DensityMatrix]:
        """Clone list plus the joint clone-register state for one input."""
        if self.source == "Learned":
            return self._learned_outputs(vec)
        return self._analytic_outputs(vec)

    def _learned_outputs(self, vec):
        task = self.task
        psi0 = prepare_input(task, np.asarray(vec, dtype=complex))
        out = run_sequence(self.seq, self.theta, psi0[:, None],
                           task.total_qubits)[:, 0]
        full = np.outer(out, out.conj())
        n = task.total_qubits
        glob = partial_trace(full, list(task.clone_registers), n)
        clones = [partial_trace(full, [q], n) for q in task.clone_registers]
        return ([DensityMatrix(c) for c in clones], DensityMatrix(glob))

    def _analytic_pair(self, mode: str):
        fam = self.family
        if fam.kind != "FixedOverlap":
            raise ValueError("analytic pair outputs need a FixedOverlap family")
        u, a0, a1, fval = _pair_outputs_sym(fam.s, mode)
        pair = [vec for vec, _ in fam.states()]
        # rotate the canonical frame onto the family's actual pair
        canon = np.stack([u, np.diag([1, -1.0]) @ u], axis=1)
        actual = np.stack([np.real(p) for p in pair], axis=1)
        rot = actual @ np.linalg.inv(canon)
        r2 = np.kron(rot, rot)
        return pair, [r2 @ a0, r2 @ a1], fval

    def _analytic_outputs(self, vec):
        pair, outs, _ = self._analytic_pair("local")
        vec = np.asarray(vec, dtype=complex)
        for p, o in zip(pair, outs):
            if abs(abs(np.vdot(p, vec)) - 1) < 1e-9:
                full = np.outer(o, o.conj())
                clones = [partial_trace(full, [q], 2) for q in (0, 1)]
                return ([DensityMatrix(c) for c in clones], DensityMatrix(full))
        raise ValueError("input is not a member of the family's state pair")


# ---------------------------------------------------------------------------
# protocol 1


def attack_p1(cloner: ClonerHandle, n: int = 1) -> AttackReport:
    """Clone-and-discriminate cheat on the two-state commitment protocol.

    Single-copy discrimination is between the honest history (commitment
    qubit untouched alongside the revealed partner state) and the cheating
    history (partner state alongside the kept clone). Detection uses the
    fidelity of the returned clone against the committed state; with n
    copies, all n must pass and the discrimination is repeated with a
    majority vote.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    fam = cloner.family
    if fam.kind != "FixedOverlap":
        raise ValueError("protocol 1 attack needs a FixedOverlap family")
    pair = [vec for vec, _ in fam.states()]
    phi0, phi1 = (np.asarray(p, dtype=complex) for p in pair)

    clones0, _ = cloner.outputs(phi0)
    clones1, _ = cloner.outputs(phi1)
    returned0, kept0 = _mat(clones0[0]), _mat(clones0[-1])
    returned1, kept1 = _mat(clones1[0]), _mat(clones1[-1])
    f_local = 0.5 * (fidelity(returned0, np.outer(phi0, phi0.conj()))
                     + fidelity(returned1, np.outer(phi1, phi1.conj())))

    rho1 = np.kron(np.outer(phi0, phi0.conj()), np.outer(phi1, phi1.conj()))
    rho2 = np.kron(np.outer(phi1, phi1.conj()), kept0)
    p_single = helstrom(rho1, rho2)
    p_maj = majority_vote_success(p_single, n)

    p_detect = 1.0 - f_local ** n
    p_succ = max(p_maj - p_detect, 0.0)
    s = abs(float(np.real(np.vdot(phi0, phi1))))
    extras = {
        "p_fail_single": 1.0 - p_single,
        "p_disc_single": p_single,
        "f_local": f_local,
        "p_detect_per_copy": 1.0 - f_local,
        "p_detect_all_copies": (1.0 - f_local) ** n,
        "p_disc_ceiling": 0.5 + 0.5 * math.sqrt(1 - s ** 4),
        "p_disc_both_cloned": helstrom(
            np.kron(np.outer(phi0, phi0.conj()), kept1),
            np.kron(np.outer(phi1, phi1.conj()), kept0)),
    }
    return AttackReport(p_disc=p_maj, bias=p_succ - 0.5, p_detect=p_detect,
                        p_succ_overall=p_succ, n_rounds=n, extras=extras)


# ---------------------------------------------------------------------------
# protocol 2, attack model I (global two-copy discrimination)


def ideal_global_pair_outputs(u, w):
    """Best exchange-symmetric two-copy output pair for two real states,
    maximizing overlap with the perfect product target.

    The second state's output is the doubled reflection through the pair
    bisector applied to the first. Returns (out_u, out_w, global_fidelity).
    """
    u = np.real(np.asarray(u, dtype=complex)).astype(float)
    w = np.real(np.asarray(w, dtype=complex)).astype(float)
    s = float(u @ w)
    b = u + w
    b = b / np.linalg.norm(b)
    d = u - w
    d = d / np.linalg.norm(d)
    rr = np.kron(np.outer(b, b) - np.outer(d, d),
                 np.outer(b, b) - np.outer(d, d))
    rs = np.array([[si @ (rr @ sj) for sj in _SYM] for si in _SYM])
    _, v = np.linalg.eigh(rs)
    uu = np.kron(u, u)
    uv = np.array([si @ uu for si in _SYM])
    y0 = math.sqrt((1 - abs(s)) / 2)
    rad = math.sqrt((1 + abs(s)) / 2)
    ts = np.linspace(0, 2 * np.pi, 40001)
    ys = np.stack([np.full_like(ts, y0), rad * np.cos(ts), rad * np.sin(ts)])
    vals = (uv @ (v @ ys)) ** 2
    k = int(np.argmax(vals))
    a = v @ ys[:, k]
    out_u = sum(a[i] * _SYM[i] for i in range(3))
    return out_u, rr @ out_u, float(vals[k])


def _require_cf4(cloner: ClonerHandle) -> StateFamily:
    fam = cloner.family
    if fam.kind != "CoinFlip4":
        raise ValueError("protocol 2 attacks need a CoinFlip4 family")
    return fam


def _learned_pair_states(cloner: ClonerHandle):
    """Joint clone-register density matrices for all four protocol states."""
    fam = cloner.family
    states = coin_flip_states(fam.phi)
    return {key: cloner.outputs(vec)[1] for key, vec in states.items()}


def _learned_mean_fidelity(cloner: ClonerHandle) -> float:
    fam = cloner.family
    total = 0.0
    count = 0
    for _, vec in coin_flip_states(fam.phi).items():
        clones, _ = cloner.outputs(vec)
        proj = np.outer(vec, np.conj(vec))
        for c in clones:
            total += fidelity(c, proj)
            count += 1
    return total / count


def attack_p2_global(cloner: ClonerHandle) -> AttackReport:
    """Attack model I: discriminate the two-copy cloner output within each
    same-overlap state pair, averaged over the two pairs.

    Ideal cloner: closed form 1/2 + sin(2 phi)/2. Learned cloner: the best
    (Helstrom) measurement between its own pair outputs, with the
    fixed-reference-projector value reported alongside.
    """
    fam = _require_cf4(cloner)
    phi = fam.phi
    states = coin_flip_states(phi)
    pair_a = ((0, 0), (1, 1))
    pair_b = ((0, 1), (1, 0))
    out_a = ideal_global_pair_outputs(states[pair_a[0]].real,
                                      states[pair_a[1]].real)
    out_b = ideal_global_pair_outputs(states[pair_b[0]].real,
                                      states[pair_b[1]].real)
    va, vap = neumark(out_a[0], out_a[1])
    vb, vbp = neumark(out_b[0], out_b[1])

    if cloner.source == "Analytic":
        p_disc = 0.5 + 0.5 * math.sin(2 * phi)
        extras = {
            "pair_global_fidelity": 0.5 * (out_a[2] + out_b[2]),
            "projector_check": 0.5 * (
                0.5 * ((va @ out_a[0]) ** 2 + (vap @ out_a[1]) ** 2)
                + 0.5 * ((vb @ out_b[0]) ** 2 + (vbp @ out_b[1]) ** 2)),
        }
    else:
        rhos = _learned_pair_states(cloner)
        p_a = helstrom(rhos[pair_a[0]], rhos[pair_a[1]])
        p_b = helstrom(rhos[pair_b[0]], rhos[pair_b[1]])
        p_disc = 0.5 * (p_a + p_b)

        def proj_prob(v, rho):
            return float(np.real(v.conj() @ _mat(rho) @ v))

        fixed = 0.5 * (0.5 * (proj_prob(va, rhos[pair_a[0]])
                              + proj_prob(vap, rhos[pair_a[1]]))
                       + 0.5 * (proj_prob(vb, rhos[pair_b[0]])
                                + proj_prob(vbp, rhos[pair_b[1]])))
        extras = {
            "p_disc_pair_a": p_a,
            "p_disc_pair_b": p_b,
            "p_disc_fixed_projectors": fixed,
            "f_local": _learned_mean_fidelity(cloner),
        }
    return AttackReport(p_disc=p_disc, bias=p_disc - 0.5, p_detect=0.0,
                        p_succ_overall=p_disc, n_rounds=1, extras=extras)


# ---------------------------------------------------------------------------
# protocol 2, attack model II (single-copy ensemble discrimination)


def shrinking_factors(phi: float) -> tuple[float, float]:
    """Bloch-vector contraction of the optimal four-state 1->2 cloner along
    the two axes spanned by the states."""
    s2 = math.sin(2 * phi) ** 2
    c2 = math.cos(2 * phi) ** 2
    den = math.sqrt(s2 * s2 + c2 * c2)
    return s2 / den, c2 / den


def attack_p2_local_4state(cloner: ClonerHandle) -> AttackReport:
    """Attack model II: per-register discrimination between the a=0 and a=1
    ensemble averages of single clones."""
    fam = _require_cf4(cloner)
    phi = fam.phi
    states = coin_flip_states(phi)
    eta_x, eta_z = shrinking_factors(phi)
    if cloner.source == "Analytic":
        sx = np.array([[0, 1], [1, 0.0]])
        sz = np.diag([1, -1.0])

        def clone_state(vec):
            mx = 2 * vec[0].real * vec[1].real
            mz = vec[0].real ** 2 - vec[1].real ** 2
            return 0.5 * (np.eye(2) + eta_x * mx * sx + eta_z * mz * sz)

        e0 = 0.5 * (clone_state(states[(0, 0)]) + clone_state(states[(1, 0)]))
        e1 = 0.5 * (clone_state(states[(0, 1)]) + clone_state(states[(1, 1)]))
        p_disc = helstrom(e0, e1)
        extras = {"eta_x": eta_x, "eta_z": eta_z,
                  "closed_form": 0.5 + eta_z * math.cos(2 * phi) / 2}
    else:
        per_register = []
        outs = {key: cloner.outputs(vec)[0]
                for key, vec in states.items()}
        n_regs = len(next(iter(outs.values())))
        for q in range(n_regs):
            e0 = 0.5 * (_mat(outs[(0, 0)][q]) + _mat(outs[(1, 0)][q]))
            e1 = 0.5 * (_mat(outs[(0, 1)][q]) + _mat(outs[(1, 1)][q]))
            per_register.append(helstrom(e0, e1))
        p_disc = max(per_register)
        extras = {"per_register": per_register,
                  "eta_x": eta_x, "eta_z": eta_z,
                  "f_local": _learned_mean_fidelity(cloner)}
    return AttackReport(p_disc=p_disc, bias=p_disc - 0.5, p_detect=0.0,
                        p_succ_overall=p_disc, n_rounds=1, extras=extras)


def attack_p2_local_2state_bounds(f_local: float, s: float) -> tuple[float, float]:
    """Discrimination probability window when only the same-x state pair is
    cloned, as a function of achieved per-clone fidelity."""
    if not 0 < s < 1:
        raise ValueError("s must lie in (0,1)")
    if not 0.5 < f_local <= 1:
        raise ValueError("f_local must lie in (1/2, 1]")
    gap = (s * s - 1) * math.sqrt((1 - s * s) / (1 - s ** 4))
    inner = f_local + gap
    lower = 0.5 + 0.5 * (1 - math.sqrt(max(inner, 0.0)))
    upper = 0.5 + 0.5 * math.sqrt(max(1 - f_local - gap, 0.0))
    return float(lower), float(upper)


# ---------------------------------------------------------------------------
# sweeps


def sweep_p1_bias(s_values, path, n: int = 1) -> list[dict]:
    """Ideal-cloner protocol-1 bias across pair overlaps; CSV columns
    s, f_local, p_disc, p_detect, bias."""
    rows = []
    for s in s_values:
        fam = StateFamily("FixedOverlap", s=float(s))
        rep = attack_p1(ClonerHandle("Analytic", fam), n=n)
        rows.append({"s": float(s), "f_local": rep.extras["f_local"],
                     "p_disc": rep.p_disc, "p_detect": rep.p_detect,
                     "bias": rep.bias})
    _write_csv(path, rows)
    return rows


def sweep_p2_bias(phi_values, path) -> list[dict]:
    """Ideal-cloner protocol-2 biases across the state angle; CSV columns
    phi, bias_global, bias_local."""
    rows = []
    for phi in phi_values:
        fam = StateFamily("CoinFlip4", phi=float(phi))
        handle = ClonerHandle("Analytic", fam)
        rows.append({"phi": float(phi),
                     "bias_global": attack_p2_global(handle).bias,
                     "bias_local": attack_p2_local_4state(handle).bias})
    _write_csv(path, rows)
    return rows


def _write_csv(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) for k, v in row.items()})
