"""Experiment runner.

Subcommands: `run` executes one JSON-configured experiment, `sweep` repeats
it across values of one config key, `reproduce` runs a named built-in
experiment. Every run writes report.json (config echo, metrics, content
hash, wall time) plus trace.csv / circuit.json when a training or circuit is
involved. All randomness descends from the config seed through named
sub-streams, so a repeated run reproduces its metrics bit for bit with the
exact estimator.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import fields as dc_fields
from pathlib import Path

import numpy as np

from vqclone.circuit import CloneTask, fc_pool, nn_pool, pc_pool, serialize_circuit
from vqclone.cost import (
    CostKind,
    cost_report,
    gradient_variance_experiment,
    layered_ansatz,
    plateau_lower_bound,
)
from vqclone.families import StateFamily
from vqclone.train import TrainConfig, plan_samples, train
from vqclone.search import SearchConfig, search
from vqclone import attack as atk

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# config construction


def build_family(d: dict) -> StateFamily:
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError("family: need an object with a 'kind' field")
    try:
        return StateFamily(d["kind"], phi=d.get("phi"), s=d.get("s"))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"family: {exc}") from exc


def build_task(d: dict) -> CloneTask:
    for key in ("family", "m_in", "n_out", "num_ancilla", "clone_registers"):
        if key not in d:
            raise ConfigError(f"task: missing field {key!r}")
    try:
        return CloneTask(d["m_in"], d["n_out"], d["num_ancilla"],
                         list(d["clone_registers"]), build_family(d["family"]))
    except ValueError as exc:
        raise ConfigError(f"task: {exc}") from exc


def build_kind(d) -> CostKind:
    if isinstance(d, str):
        d = {"variant": d}
    variant = d.get("variant")
    try:
        if variant == "Local":
            return CostKind.local()
        if variant == "Squared":
            return CostKind.squared()
        if variant == "Global":
            return CostKind.global_()
        if variant == "Asymmetric":
            return CostKind.asymmetric(d["p"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"cost: {exc}") from exc
    raise ConfigError(f"cost: unknown variant {variant!r}")


def build_pool(name: str, num_qubits: int):
    if name == "pc":
        return pc_pool()
    if name == "nn":
        return nn_pool(num_qubits)
    if name == "fc":
        return fc_pool(num_qubits)
    raise ConfigError(f"pool: unknown pool {name!r} (use pc|nn|fc)")


def _dataclass_config(cls, d: dict, label: str):
    names = {f.name for f in dc_fields(cls)}
    bad = set(d) - names
    if bad:
        raise ConfigError(f"{label}: unknown field(s) {sorted(bad)}")
    try:
        return cls(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{label}: {exc}") from exc


# ---------------------------------------------------------------------------
# experiment execution


def _metrics_hash(metrics: dict) -> str:
    blob = json.dumps(metrics, sort_keys=True, default=repr).encode()
    return hashlib.sha256(blob).hexdigest()


def _write_report(out_dir: Path, cfg: dict, metrics: dict, t0: float) -> None:
    report = {
        "config": cfg,
        "artifact_hash": _metrics_hash(metrics),
        "metrics": metrics,
        "wall_time_s": round(time.time() - t0, 3),
    }
    (out_dir / "report.json").write_text(json.dumps(report, indent=1))


def _run_train(cfg: dict, out_dir: Path) -> dict:
    task = build_task(cfg.get("task", {}))
    kind = build_kind(cfg.get("cost", "Squared"))
    tc = _dataclass_config(TrainConfig, cfg.get("train", {}), "train")
    layers = cfg.get("layers", 5)
    seq, theta0 = layered_ansatz(task.total_qubits, layers)
    rng = np.random.default_rng(np.random.SeedSequence(tc.seed).spawn(1)[0])
    theta0 = np.where(seq.parameterized_mask(),
                      rng.uniform(0, 2 * np.pi, len(theta0)), 0.0)
    theta, trace = train(task, seq, theta0, kind, tc)
    trace.to_csv(out_dir / "trace.csv")
    (out_dir / "circuit.json").write_text(serialize_circuit(seq, theta))
    fids = trace.clone_fidelities[-1] if len(trace) else []
    return {
        "final_cost_train": trace.cost_train[-1] if len(trace) else None,
        "final_cost_test": trace.cost_test[-1] if len(trace) else None,
        "clone_fidelities": [float(f) for f in fids],
        "mean_clone_fidelity": float(np.mean(fids)) if len(fids) else None,
        "epochs_run": len(trace),
    }


def _run_search(cfg: dict, out_dir: Path) -> dict:
    task = build_task(cfg.get("task", {}))
    kind = build_kind(cfg.get("cost", "Local"))
    sd = dict(cfg.get("search", {}))
    pool_name = sd.pop("pool", "nn")
    sd["pool"] = build_pool(pool_name, task.total_qubits)
    sc = _dataclass_config(SearchConfig, sd, "search")
    result = search(task, kind, sc)
    (out_dir / "circuit.json").write_text(
        serialize_circuit(result.best_seq, result.best_theta))
    (out_dir / "search.json").write_text(result.summary_json())
    report = cost_report(kind, task, result.best_seq, result.best_theta,
                         _search_targets(task, sc))
    return {
        "best_cost": result.best_cost,
        "cost_history": result.cost_history,
        "accepted": result.accepted,
        "mean_clone_fidelity": float(np.mean(report.per_clone_fidelities)),
        "clone_fidelities": [float(f) for f in report.per_clone_fidelities],
    }


def _search_targets(task, sc):
    from vqclone.search import _fixed_targets
    rng = np.random.default_rng(np.random.SeedSequence(sc.seed).spawn(3)[0])
    return _fixed_targets(task, sc, rng)


def _run_attack(cfg: dict, out_dir: Path) -> dict:
    protocol = cfg.get("protocol")
    fam = build_family(cfg.get("family", {}))
    handle = atk.ClonerHandle("Analytic", fam)
    if protocol == "p1":
        rep = atk.attack_p1(handle, n=cfg.get("n", 1))
    elif protocol == "p2-global":
        rep = atk.attack_p2_global(handle)
    elif protocol == "p2-local":
        rep = atk.attack_p2_local_4state(handle)
    elif protocol == "p2-bounds":
        lo, hi = atk.attack_p2_local_2state_bounds(cfg["f_local"], cfg["s"])
        (out_dir / "attack.json").write_text(
            json.dumps({"lower": lo, "upper": hi}, indent=1))
        return {"lower": lo, "upper": hi}
    else:
        raise ConfigError(f"attack: unknown protocol {protocol!r}")
    (out_dir / "attack.json").write_text(rep.to_json())
    return json.loads(rep.to_json())


_MODES = {"train": _run_train, "search": _run_search, "attack": _run_attack}


def run_config(cfg: dict, out_dir: Path) -> dict:
    mode = cfg.get("mode")
    if mode in _MODES:
        return _MODES[mode](cfg, out_dir)
    if isinstance(mode, str) and mode.startswith("reproduce-"):
        return run_reproduce(mode[len("reproduce-"):], out_dir,
                             seed=cfg.get("seed", 0))
    raise ConfigError(f"mode: unknown mode {mode!r}")


def _resolve_out(cfg: dict, fallback: str) -> Path:
    out = os.environ.get("VQCLONE_OUT") or cfg.get("output_dir") or fallback
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_run(config_path: str) -> int:
    t0 = time.time()
    try:
        cfg = json.loads(Path(config_path).read_text())
    except FileNotFoundError:
        print(f"config error: no such file {config_path!r}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(f"config error: {config_path}:{exc.lineno}:{exc.colno}: "
              f"{exc.msg}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out_dir = _resolve_out(cfg, "vqclone-out")
        metrics = run_config(cfg, out_dir)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _write_report(out_dir, cfg, metrics, t0)
    print(json.dumps(metrics, indent=1, default=repr))
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep


def _sweep_one(args):
    cfg, out_dir = args
    t0 = time.time()
    metrics = run_config(cfg, Path(out_dir))
    _write_report(Path(out_dir), cfg, metrics, t0)
    return metrics


def _set_param(cfg: dict, param: str, value):
    """Set a possibly dotted key, checking that the path exists or lands in
    a known section."""
    parts = param.split(".")
    node = cfg
    for p in parts[:-1]:
        if p not in node or not isinstance(node[p], dict):
            node[p] = {}
        node = node[p]
    node[parts[-1]] = value
    return cfg


_KNOWN_PARAMS = {"seed", "layers", "n", "f_local", "s"}
_KNOWN_SECTIONS = {"train": TrainConfig, "search": SearchConfig}


def _check_param(param: str) -> None:
    parts = param.split(".")
    if len(parts) == 1:
        if parts[0] in _KNOWN_PARAMS:
            return
        raise ConfigError(f"sweep: unknown param {param!r}")
    section, field_name = parts[0], parts[-1]
    cls = _KNOWN_SECTIONS.get(section)
    if cls is None or len(parts) != 2:
        raise ConfigError(f"sweep: unknown param {param!r}")
    if field_name not in {f.name for f in dc_fields(cls)}:
        raise ConfigError(f"sweep: {section!r} has no field {field_name!r}")


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def cmd_sweep(config_path: str, param: str, values: list, jobs: int) -> int:
    try:
        base = json.loads(Path(config_path).read_text())
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if not values:
            raise ConfigError("sweep: empty values list")
        _check_param(param)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    root = _resolve_out(base, "vqclone-sweep")
    tasks = []
    for v in values:
        cfg = json.loads(json.dumps(base))
        _set_param(cfg, param, v)
        sub = root / f"{param.replace('.', '-')}={v}"
        sub.mkdir(parents=True, exist_ok=True)
        cfg.pop("output_dir", None)
        tasks.append((cfg, str(sub)))
    try:
        if jobs > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as ex:
                results = list(ex.map(_sweep_one, tasks))
        else:
            results = [_sweep_one(t) for t in tasks]
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    keys = sorted({k for m in results for k in m
                   if np.isscalar(m[k]) or m[k] is None})
    lines = [",".join([param] + keys)]
    for v, m in zip(values, results):
        lines.append(",".join([repr(v)] + [repr(m.get(k)) for k in keys]))
    (root / "sweep.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {root / 'sweep.csv'} ({len(values)} runs)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# built-in reproductions


def _repro_pc_1to2(out_dir: Path, seed: int) -> dict:
    cfg = {
        "mode": "train",
        "task": {"family": {"kind": "PhaseCovariant"}, "m_in": 1, "n_out": 2,
                 "num_ancilla": 1, "clone_registers": [0, 1]},
        "cost": "Squared",
        "layers": 5,
        "train": {"epochs": 100, "batch_size": 10, "n_train": 24,
                  "n_test": 8, "seed": seed},
    }
    metrics = _run_train(cfg, out_dir)
    fids = metrics["clone_fidelities"]
    metrics["F_B"], metrics["F_E"] = float(fids[0]), float(fids[1])
    return metrics


def _repro_pc_search(out_dir: Path, seed: int) -> dict:
    cfg = {
        "mode": "search",
        "task": {"family": {"kind": "PhaseCovariant"}, "m_in": 1, "n_out": 2,
                 "num_ancilla": 1, "clone_registers": [0, 1]},
        "cost": "Local",
        "search": {"pool": "pc", "seq_len": 35, "iterations": 50,
                   "epochs_per_iter": 100, "seed": seed, "batch_size": 40},
    }
    return _run_search(cfg, out_dir)


def _repro_p1_attack(out_dir: Path, seed: int) -> dict:
    fam = StateFamily("FixedOverlap", s=math.cos(math.pi / 9))
    handle = atk.ClonerHandle("Analytic", fam)
    rep1 = atk.attack_p1(handle, n=1)
    (out_dir / "attack.json").write_text(rep1.to_json())
    votes = {n: atk.attack_p1(handle, n=n).p_disc for n in (1, 3, 5, 11, 25)}
    lines = ["n,p_disc_majority"] + [f"{n},{p!r}" for n, p in votes.items()]
    (out_dir / "majority.csv").write_text("\n".join(lines) + "\n")
    return {
        "p_disc": rep1.p_disc,
        "p_fail": rep1.extras["p_fail_single"],
        "p_detect": rep1.p_detect,
        "bias": rep1.bias,
        "f_local": rep1.extras["f_local"],
        "p_disc_ceiling": rep1.extras["p_disc_ceiling"],
        "majority_votes": {str(n): p for n, p in votes.items()},
    }


def learned_four_state_cloner(seed: int = 0):
    """1->2 cloner for the four equatorial protocol states at phi=pi/8,
    found by local-cost structure search (length-35 nearest-neighbour pool,
    50 iterations). Converges to the four-state fidelity optimum; used by
    both the reproduce path and the acceptance checks so they exercise the
    same circuit. Takes about 90 s."""
    fam = StateFamily("CoinFlip4", phi=math.pi / 8)
    task = CloneTask(1, 2, 1, [0, 1], fam)
    cfg = SearchConfig(seq_len=35, pool=nn_pool(3), iterations=50,
                       epochs_per_iter=100, seed=seed)
    res = search(task, CostKind.local(), cfg)
    handle = atk.ClonerHandle("Learned", fam, seq=res.best_seq,
                              theta=res.best_theta, task=task)
    return handle, res


def _repro_p2_attacks(out_dir: Path, seed: int) -> dict:
    fam = StateFamily("CoinFlip4", phi=math.pi / 8)
    ideal = atk.ClonerHandle("Analytic", fam)
    ideal_i = atk.attack_p2_global(ideal)
    ideal_ii = atk.attack_p2_local_4state(ideal)
    learned, res = learned_four_state_cloner(seed)
    (out_dir / "search.json").write_text(res.summary_json())
    learned_i = atk.attack_p2_global(learned)
    learned_ii = atk.attack_p2_local_4state(learned)
    (out_dir / "circuit.json").write_text(
        serialize_circuit(learned.seq, learned.theta))
    (out_dir / "attack.json").write_text(json.dumps({
        "ideal_i": json.loads(ideal_i.to_json()),
        "ideal_ii": json.loads(ideal_ii.to_json()),
        "learned_i": json.loads(learned_i.to_json()),
        "learned_ii": json.loads(learned_ii.to_json()),
    }, indent=1))
    return {
        "bias_i_ideal": ideal_i.bias,
        "bias_ii_ideal": ideal_ii.bias,
        "bias_i_learned": learned_i.bias,
        "bias_ii_learned": learned_ii.bias,
        "f_local_learned": learned_i.extras["f_local"],
        "search_cost": res.best_cost,
        "bounds_2state": list(atk.attack_p2_local_2state_bounds(
            0.98985, 2 ** -0.5)),
    }


def _repro_sample_plan(out_dir: Path, seed: int) -> dict:
    plan = plan_samples(0.1, 0.05)
    return {"gamma": plan.gamma, "delta": plan.delta,
            "total_samples": plan.total_samples}


def _repro_gradient_variance(out_dir: Path, seed: int) -> dict:
    out = {}
    for n in (2, 4):
        k_layers = max(1, math.ceil(math.log2(n)))
        var, bound = gradient_variance_experiment(n, k_layers, n_samples=200,
                                                  seed=seed)
        out[f"N{n}"] = {"variance": var, "bound": bound,
                        "exceeds": bool(var > bound)}
    return out


_REPRO = {
    "pc-1to2": _repro_pc_1to2,
    "pc-search": _repro_pc_search,
    "p1-attack": _repro_p1_attack,
    "p2-attacks": _repro_p2_attacks,
    "sample-plan": _repro_sample_plan,
    "gradient-variance": _repro_gradient_variance,
}


def run_reproduce(rid: str, out_dir: Path, seed: int = 0) -> dict:
    if rid not in _REPRO:
        raise ConfigError(
            f"reproduce: unknown id {rid!r} (have {sorted(_REPRO)})")
    return _REPRO[rid](out_dir, seed)


def cmd_reproduce(rid: str, seed: int) -> int:
    t0 = time.time()
    try:
        out_dir = _resolve_out({}, f"vqclone-out-{rid}")
        metrics = run_reproduce(rid, out_dir, seed)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _write_report(out_dir, {"mode": f"reproduce-{rid}", "seed": seed},
                  metrics, t0)
    print(json.dumps(metrics, indent=1, default=repr))
    return EXIT_OK


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vqclone",
        description="variational quantum cloning: train, search, and "
                    "protocol attacks")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one JSON experiment config")
    p_run.add_argument("config")

    p_sweep = sub.add_parser("sweep", help="repeat a config over one param")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--param", required=True)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values (JSON literals)")
    p_sweep.add_argument("--jobs", type=int, default=1)

    p_rep = sub.add_parser("reproduce", help="run a named built-in experiment")
    p_rep.add_argument("id", choices=sorted(_REPRO))
    p_rep.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config)
    if args.command == "sweep":
        values = [_parse_value(v) for v in args.values.split(",") if v != ""]
        return cmd_sweep(args.config, args.param, values, args.jobs)
    return cmd_reproduce(args.id, args.seed)


if __name__ == "__main__":
    sys.exit(main())
