"""Variational quantum cloning: simulator, cost functions, structure search,
and cloning-based attacks on two coin-flipping protocols.

Qubit convention used throughout: qubit 0 is the most significant bit of the
computational-basis index, matching ``numpy.kron`` composition order.
"""

from vqclone.qmath import (
    DensityMatrix,
    PureState,
    fidelity,
    fubini_study,
    kron,
    matrix_sqrt_psd,
    partial_trace,
    trace_distance,
)
from vqclone.circuit import (
    CloneTask,
    GatePool,
    GateSequence,
    GateSpec,
    build_unitary,
    clone_states,
    gate_unitary,
    parse_circuit,
    run_clone_task,
    serialize_circuit,
)
from vqclone.families import StateFamily, StateSample, sample
from vqclone.cost import (
    CostKind,
    CostReport,
    cost_report,
    faithfulness_bounds,
    finite_diff_grad,
    grad,
)
from vqclone.train import TrainConfig, TrainTrace, plan_samples, train
from vqclone.search import SearchConfig, SearchResult, search
from vqclone.attack import (
    AttackReport,
    ClonerHandle,
    attack_p1,
    attack_p2_global,
    attack_p2_local_2state_bounds,
    attack_p2_local_4state,
    helstrom,
)

__version__ = "0.1.0"

__all__ = [
    "DensityMatrix",
    "PureState",
    "kron",
    "partial_trace",
    "fidelity",
    "trace_distance",
    "fubini_study",
    "matrix_sqrt_psd",
    "GateSpec",
    "GatePool",
    "GateSequence",
    "CloneTask",
    "gate_unitary",
    "build_unitary",
    "run_clone_task",
    "clone_states",
    "serialize_circuit",
    "parse_circuit",
    "StateFamily",
    "StateSample",
    "sample",
    "CostKind",
    "CostReport",
    "cost_report",
    "grad",
    "finite_diff_grad",
    "faithfulness_bounds",
    "TrainConfig",
    "TrainTrace",
    "train",
    "plan_samples",
    "SearchConfig",
    "SearchResult",
    "search",
    "ClonerHandle",
    "AttackReport",
    "helstrom",
    "attack_p1",
    "attack_p2_global",
    "attack_p2_local_4state",
    "attack_p2_local_2state_bounds",
    "__version__",
]
