"""Qubitization cost accounting.

Per-step gate counts are data (a bundled table or a registered model); this
module only turns them into totals for a target precision.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources as _res
from typing import Callable, Mapping

from .errors import ArgumentError, UnknownModel
from .hamiltonian import PauliHamiltonian

CHEMICAL_ACCURACY = 1e-3


@dataclass(frozen=True)
class StepCost:
    qubits: int
    t_gates: int
    rz_rotations: int

    def __post_init__(self) -> None:
        for name in ("qubits", "t_gates", "rz_rotations"):
            if getattr(self, name) < 0:
                raise ArgumentError(f"{name} must be non-negative")


@dataclass(frozen=True)
class ResourceEstimate:
    lam: float
    delta: float
    queries: int
    synthesis_t: int
    total_t: int
    qubits: int
    convention_factor: int
    step: StepCost


def _ceil(x: float) -> int:
    # 962 / 0.001 must give 962000, not 962001
    return math.ceil(x - 1e-12 * max(1.0, abs(x)))


def queries_for_precision(lam: float, delta: float, convention_factor: int = 1) -> int:
    """Walk-operator applications ``ceil(lambda / (factor * delta))``.

    ``convention_factor=2`` applies the phase-doubling saving; the default 1
    is the convention under which the published per-molecule totals follow.
    """
    if not delta > 0:
        raise ArgumentError("delta must be positive")
    if convention_factor not in (1, 2):
        raise ArgumentError("convention_factor must be 1 or 2")
    if lam < 0:
        raise ArgumentError("lambda must be non-negative")
    return _ceil(lam / (convention_factor * delta))


def synthesis_t_count(n_rz: int, epsilon_total: float) -> int:
    """Leading-order T count ``3 n log2(n / eps)`` to synthesize ``n`` rotations."""
    if n_rz < 0:
        raise ArgumentError("n_rz must be non-negative")
    if not epsilon_total > 0:
        raise ArgumentError("epsilon_total must be positive")
    if n_rz == 0:
        return 0
    return _ceil(3 * n_rz * math.log2(n_rz / epsilon_total))


def estimate_total(
    step: StepCost, lam: float, delta: float = CHEMICAL_ACCURACY, convention_factor: int = 1
) -> ResourceEstimate:
    """Total T count: queries times per-step T plus rotation synthesis.

    The synthesis error budget is ``delta`` (numerically) shared by all
    ``queries * rz_rotations`` rotations of the run.
    """
    queries = queries_for_precision(lam, delta, convention_factor)
    synth = synthesis_t_count(queries * step.rz_rotations, delta)
    return ResourceEstimate(
        lam=lam,
        delta=delta,
        queries=queries,
        synthesis_t=synth,
        total_t=queries * step.t_gates + synth,
        qubits=step.qubits,
        convention_factor=convention_factor,
        step=step,
    )


# ---------------------------------------------------------------------------
# cost tables and models


@dataclass(frozen=True)
class CostRecord:
    name: str
    step: StepCost
    l1_norm: float | None = None


def parse_cost_table(text: str) -> dict[str, CostRecord]:
    """Rows ``name,qubits,t_gates,rz_rotations[,l1_norm]`` with a header line."""
    reader = csv.DictReader(io.StringIO(text))
    required = {"name", "qubits", "t_gates", "rz_rotations"}
    if reader.fieldnames is None or not required <= set(reader.fieldnames):
        raise ValueError(f"cost table needs columns {sorted(required)}")
    out = {}
    for row in reader:
        lam = row.get("l1_norm")
        out[row["name"]] = CostRecord(
            name=row["name"],
            step=StepCost(int(row["qubits"]), int(row["t_gates"]), int(row["rz_rotations"])),
            l1_norm=float(lam) if lam not in (None, "") else None,
        )
    return out


def bundled_cost_table() -> dict[str, CostRecord]:
    text = _res.files("broomsim.data").joinpath("table_vi.csv").read_text(encoding="utf-8")
    return parse_cost_table(text)


_MODELS: dict[str, Callable[[PauliHamiltonian], StepCost]] = {}


def register_model(name: str):
    def deco(fn: Callable[[PauliHamiltonian], StepCost]):
        _MODELS[name] = fn
        return fn

    return deco


@register_model("select-prepare")
def _select_prepare(h: PauliHamiltonian) -> StepCost:
    """Crude generic count: unary-iteration select plus rotation-tree prepare.

    Not derived from a circuit; a placeholder until circuit-level counts exist.
    """
    n_terms = len(h.terms)
    if n_terms == 0:
        return StepCost(0, 0, 0)
    index_bits = max(1, math.ceil(math.log2(n_terms)))
    return StepCost(
        qubits=h.n_qubits + 2 * index_bits + 1,
        t_gates=4 * (n_terms - 1) + 4 * index_bits,
        rz_rotations=2 * n_terms,
    )


def available_models() -> list[str]:
    return sorted(_MODELS)


def load_step_cost(record: Mapping) -> StepCost:
    """Resolve a cost-model record.

    Accepted forms: explicit counts ``{qubits, t_gates, rz_rotations}``; a
    bundled table row ``{"table": name}``; or a registered model
    ``{"model": name, "hamiltonian": PauliHamiltonian}``.
    """
    if "table" in record:
        table = record.get("rows") or bundled_cost_table()
        try:
            return table[record["table"]].step
        except KeyError:
            raise UnknownModel(f"no cost-table row named {record['table']!r}") from None
    if "model" in record:
        fn = _MODELS.get(record["model"])
        if fn is None:
            raise UnknownModel(f"no cost model named {record['model']!r}; known: {available_models()}")
        return fn(record["hamiltonian"])
    try:
        return StepCost(int(record["qubits"]), int(record["t_gates"]), int(record["rz_rotations"]))
    except KeyError as exc:
        raise ArgumentError(f"cost record is missing {exc.args[0]!r}") from None


ESTIMATE_COLUMNS = [
    "name", "qubits", "t_gates", "rz_rotations", "l1_norm",
    "delta", "factor", "queries", "synthesis_t", "total_t",
]


def estimates_to_csv(rows: list[tuple[str, ResourceEstimate]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ESTIMATE_COLUMNS)
    for name, e in rows:
        w.writerow([
            name, e.qubits, e.step.t_gates, e.step.rz_rotations, repr(e.lam),
            repr(e.delta), e.convention_factor, e.queries, e.synthesis_t, e.total_t,
        ])
    return buf.getvalue()
