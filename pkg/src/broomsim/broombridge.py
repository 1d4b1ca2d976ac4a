"""Reading, validating and writing Broombridge v0.1 documents.

Orbital indices are 1-based on disk and 0-based everywhere inside the
package; the conversion happens only in :func:`parse_document` and
:func:`serialize_document`.
"""

from __future__ import annotations

import copy
import dataclasses
import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
import yaml

from .errors import ArgumentError, DocumentSyntaxError, SchemaError

FORMAT_VERSION = "0.1"
SCHEMA_URL = (
    "https://raw.githubusercontent.com/Microsoft/Quantum/master/"
    "Chemistry/Schema/broombridge-0.1.schema.json"
)
VACUUM = "|vacuum>"
DUPLICATE_TOLERANCE = 1e-10
ROUND_TRIP_DIGITS = 12

_TOKEN_RE = re.compile(r"^\((\d+)([ab])\)(\+?)$")

_KNOWN_PROBLEM_KEYS = (
    "n_orbitals",
    "n_electrons",
    "coulomb_repulsion",
    "energy_offset",
    "scf_energy",
    "fci_energy",
    "hamiltonian",
    "initial_state_suggestions",
)


@dataclass(frozen=True)
class LadderToken:
    """One creation or annihilation operator in a trial wavefunction.

    ``orbital`` is 0-based; ``spin`` is ``"alpha"`` or ``"beta"``;
    ``kind`` is ``"raise"`` or ``"lower"``.
    """

    orbital: int
    spin: str
    kind: str

    def to_text(self) -> str:
        s = "a" if self.spin == "alpha" else "b"
        return f"({self.orbital + 1}{s})" + ("+" if self.kind == "raise" else "")

    @classmethod
    def from_text(cls, text: str) -> "LadderToken":
        m = _TOKEN_RE.match(text.strip())
        if m is None:
            raise ValueError(f"malformed ladder token {text!r}")
        orbital = int(m.group(1))
        if orbital < 1:
            raise ValueError(f"orbital index must be >= 1 in {text!r}")
        return cls(
            orbital=orbital - 1,
            spin="alpha" if m.group(2) == "a" else "beta",
            kind="raise" if m.group(3) else "lower",
        )


@dataclass(frozen=True)
class InitialStateAnsatz:
    """A trial wavefunction: a weighted sum of ladder strings acting on vacuum.

    Operators in each string act right to left, as written on disk.
    Coefficients need not be normalized.
    """

    label: str
    terms: tuple[tuple[float, tuple[LadderToken, ...]], ...]
    energy: float | None = None
    extras: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class FciEnergy:
    lower: float
    upper: float
    value: float | None = None


@dataclass(frozen=True)
class ProblemDescription:
    """One entry of the ``integral_sets`` list.

    Integral maps are keyed by canonical 0-based index tuples: ``(p, q)`` with
    ``p <= q`` for one-electron terms and the minimal 8-fold symmetry image
    for two-electron (Mulliken) terms.
    """

    n_orbitals: int
    n_electrons: int
    coulomb_repulsion: float
    scf_energy: float
    one_electron: dict
    two_electron: dict
    energy_offset: float = 0.0
    fci_energy: FciEnergy | None = None
    initial_state_suggestions: tuple[InitialStateAnsatz, ...] = ()
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def n_spin_orbitals(self) -> int:
        return 2 * self.n_orbitals

    @property
    def identity_offset(self) -> float:
        return self.energy_offset + self.coulomb_repulsion

    @property
    def one_electron_integrals(self) -> list[tuple[int, int, float]]:
        return [(p, q, v) for (p, q), v in sorted(self.one_electron.items())]

    @property
    def two_electron_integrals(self) -> list[tuple[int, int, int, int, float]]:
        return [(*k, v) for k, v in sorted(self.two_electron.items())]

    def ansatz(self, label: str) -> InitialStateAnsatz:
        from .errors import UnknownLabel

        for state in self.initial_state_suggestions:
            if state.label == label:
                return state
        known = [s.label for s in self.initial_state_suggestions]
        raise UnknownLabel(f"no initial state labelled {label!r}; known: {known}")


@dataclass(frozen=True)
class BroombridgeDocument:
    problems: tuple[ProblemDescription, ...]
    format_version: str = FORMAT_VERSION
    extras: dict = field(default_factory=dict, compare=False)


def two_electron_images(p: int, q: int, r: int, s: int) -> list[tuple[int, int, int, int]]:
    """All eight real-orbital symmetry images of a Mulliken index tuple."""
    return [
        (p, q, r, s),
        (q, p, r, s),
        (p, q, s, r),
        (q, p, s, r),
        (r, s, p, q),
        (s, r, p, q),
        (r, s, q, p),
        (s, r, q, p),
    ]


def canonical_two_electron_key(p: int, q: int, r: int, s: int) -> tuple[int, int, int, int]:
    """Lexicographically smallest symmetry image of ``(pq|rs)``."""
    a, b = (p, q) if p <= q else (q, p)
    c, d = (r, s) if r <= s else (s, r)
    return (a, b, c, d) if (a, b) <= (c, d) else (c, d, a, b)


def canonical_one_electron_key(p: int, q: int) -> tuple[int, int]:
    return (p, q) if p <= q else (q, p)


def two_electron_classes(n_orbitals: int) -> list[tuple[int, int, int, int]]:
    """Sorted canonical 0-based keys of every two-electron symmetry class."""
    keys = {
        canonical_two_electron_key(*idx)
        for idx in itertools.product(range(n_orbitals), repeat=4)
    }
    return sorted(keys)


def one_electron_classes(n_orbitals: int) -> list[tuple[int, int]]:
    return [(p, q) for p in range(n_orbitals) for q in range(p, n_orbitals)]


# ---------------------------------------------------------------------------
# parsing


def _is_int(x: Any) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _is_real(x: Any) -> bool:
    return (isinstance(x, (int, float)) and not isinstance(x, bool)) and math.isfinite(x)


def _require(node: Mapping, key: str, path: str) -> Any:
    if key not in node:
        raise SchemaError(f"{path}.{key}" if path else key, "required key is missing")
    return node[key]


def _mapping(node: Any, path: str) -> Mapping:
    if not isinstance(node, Mapping):
        raise SchemaError(path, f"expected a mapping, got {type(node).__name__}")
    return node


def _check_units(node: Mapping, path: str) -> None:
    units = node.get("units", "hartree")
    if units != "hartree":
        raise SchemaError(f"{path}.units", f"unsupported unit {units!r}; only hartree is accepted")


def _energy(node: Any, path: str) -> float:
    if _is_real(node):
        return float(node)
    node = _mapping(node, path)
    _check_units(node, path)
    value = _require(node, "value", path)
    if not _is_real(value):
        raise SchemaError(f"{path}.value", f"expected a finite real number, got {value!r}")
    return float(value)


def _positive_int(node: Any, path: str) -> int:
    if not _is_int(node) or node < 1:
        raise SchemaError(path, f"expected a positive integer, got {node!r}")
    return int(node)


def _parse_fci(node: Any, path: str) -> FciEnergy:
    node = _mapping(node, path)
    _check_units(node, path)
    bounds = {}
    for key in ("lower", "upper"):
        v = _require(node, key, path)
        if not _is_real(v):
            raise SchemaError(f"{path}.{key}", f"expected a finite real number, got {v!r}")
        bounds[key] = float(v)
    value = node.get("value")
    if value is not None and not _is_real(value):
        raise SchemaError(f"{path}.value", f"expected a finite real number, got {value!r}")
    if bounds["lower"] > bounds["upper"]:
        raise SchemaError(f"{path}.upper", "upper bound is below lower bound")
    return FciEnergy(
        lower=bounds["lower"],
        upper=bounds["upper"],
        value=None if value is None else float(value),
    )


def _parse_integral_block(
    node: Any, path: str, arity: int, n_orbitals: int
) -> dict:
    node = _mapping(node, path)
    _check_units(node, path)
    fmt = node.get("format", "sparse")
    if fmt != "sparse":
        raise SchemaError(f"{path}.format", f"unsupported integral format {fmt!r}")
    if arity == 4:
        conv = _require(node, "index_convention", path)
        if conv != "mulliken":
            raise SchemaError(
                f"{path}.index_convention", f"unsupported index convention {conv!r}"
            )
    values = _require(node, "values", path)
    if not isinstance(values, list):
        raise SchemaError(f"{path}.values", "expected a list of integral entries")
    canon = canonical_one_electron_key if arity == 2 else canonical_two_electron_key
    out: dict = {}
    for i, entry in enumerate(values):
        epath = f"{path}.values[{i}]"
        if not isinstance(entry, list) or len(entry) != arity + 1:
            raise SchemaError(epath, f"expected {arity} indices followed by a value")
        *idx, value = entry
        for j, k in enumerate(idx):
            if not _is_int(k) or not 1 <= k <= n_orbitals:
                raise SchemaError(
                    f"{epath}[{j}]", f"orbital index {k!r} outside [1, {n_orbitals}]"
                )
        if not _is_real(value):
            raise SchemaError(f"{epath}[{arity}]", f"expected a finite real number, got {value!r}")
        key = canon(*(k - 1 for k in idx))
        if key in out:
            if abs(out[key] - value) > DUPLICATE_TOLERANCE:
                raise SchemaError(
                    epath,
                    f"duplicate symmetry class {tuple(k + 1 for k in key)} "
                    f"with conflicting value ({out[key]!r} vs {value!r})",
                )
            continue
        out[key] = float(value)
    return out


def _parse_superposition_term(
    entry: Any, path: str, n_orbitals: int
) -> tuple[float, tuple[LadderToken, ...]]:
    if not isinstance(entry, list) or len(entry) < 2:
        raise SchemaError(path, "expected [coefficient, tokens..., '|vacuum>']")
    coeff, *tokens = entry
    if not _is_real(coeff):
        raise SchemaError(f"{path}[0]", f"expected a finite real coefficient, got {coeff!r}")
    if tokens[-1] != VACUUM:
        raise SchemaError(f"{path}[{len(entry) - 1}]", f"term must end with {VACUUM!r}")
    ops = []
    for j, tok in enumerate(tokens[:-1], start=1):
        if not isinstance(tok, str):
            raise SchemaError(f"{path}[{j}]", f"expected a ladder token, got {tok!r}")
        try:
            op = LadderToken.from_text(tok)
        except ValueError as exc:
            raise SchemaError(f"{path}[{j}]", str(exc)) from None
        if op.orbital >= n_orbitals:
            raise SchemaError(
                f"{path}[{j}]", f"orbital {op.orbital + 1} outside [1, {n_orbitals}]"
            )
        ops.append(op)
    return float(coeff), tuple(ops)


def _parse_initial_states(node: Any, path: str, n_orbitals: int) -> tuple[InitialStateAnsatz, ...]:
    if not isinstance(node, list):
        raise SchemaError(path, "expected a list of initial states")
    states = []
    seen = set()
    for i, item in enumerate(node):
        ipath = f"{path}[{i}]"
        item = _mapping(item, ipath)
        spath = f"{ipath}.state"
        state = _mapping(_require(item, "state", ipath), spath)
        label = _require(state, "label", spath)
        if not isinstance(label, str):
            raise SchemaError(f"{spath}.label", "label must be a string")
        if label in seen:
            raise SchemaError(f"{spath}.label", f"duplicate label {label!r}")
        seen.add(label)
        energy = None
        if state.get("energy") is not None:
            energy = _energy(state["energy"], f"{spath}.energy")
        terms_node = _require(state, "superposition", spath)
        if not isinstance(terms_node, list):
            raise SchemaError(f"{spath}.superposition", "expected a list of terms")
        terms = tuple(
            _parse_superposition_term(t, f"{spath}.superposition[{j}]", n_orbitals)
            for j, t in enumerate(terms_node)
        )
        extras = {k: copy.deepcopy(v) for k, v in state.items()
                  if k not in ("label", "energy", "superposition")}
        extras.update({f"__item__{k}": copy.deepcopy(v) for k, v in item.items() if k != "state"})
        states.append(InitialStateAnsatz(label=label, terms=terms, energy=energy, extras=extras))
    return tuple(states)


def _parse_problem(node: Any, path: str) -> ProblemDescription:
    node = _mapping(node, path)
    n_orbitals = _positive_int(_require(node, "n_orbitals", path), f"{path}.n_orbitals")
    n_electrons = _positive_int(_require(node, "n_electrons", path), f"{path}.n_electrons")
    if n_electrons > 2 * n_orbitals:
        raise SchemaError(
            f"{path}.n_electrons",
            f"{n_electrons} electrons do not fit in {n_orbitals} spatial orbitals",
        )
    coulomb = _energy(_require(node, "coulomb_repulsion", path), f"{path}.coulomb_repulsion")
    scf = _energy(_require(node, "scf_energy", path), f"{path}.scf_energy")
    offset = 0.0
    if "energy_offset" in node:
        offset = _energy(node["energy_offset"], f"{path}.energy_offset")
    fci = None
    if node.get("fci_energy") is not None:
        fci = _parse_fci(node["fci_energy"], f"{path}.fci_energy")

    hpath = f"{path}.hamiltonian"
    ham = _mapping(_require(node, "hamiltonian", path), hpath)
    one = _parse_integral_block(
        _require(ham, "one_electron_integrals", hpath),
        f"{hpath}.one_electron_integrals", 2, n_orbitals,
    )
    two = _parse_integral_block(
        _require(ham, "two_electron_integrals", hpath),
        f"{hpath}.two_electron_integrals", 4, n_orbitals,
    )
    states: tuple[InitialStateAnsatz, ...] = ()
    if node.get("initial_state_suggestions") is not None:
        states = _parse_initial_states(
            node["initial_state_suggestions"], f"{path}.initial_state_suggestions", n_orbitals
        )

    extras = {k: copy.deepcopy(v) for k, v in node.items() if k not in _KNOWN_PROBLEM_KEYS}
    ham_extras = {k: copy.deepcopy(v) for k, v in ham.items()
                  if k not in ("one_electron_integrals", "two_electron_integrals")}
    if ham_extras:
        extras["__hamiltonian__"] = ham_extras
    return ProblemDescription(
        n_orbitals=n_orbitals,
        n_electrons=n_electrons,
        coulomb_repulsion=coulomb,
        scf_energy=scf,
        energy_offset=offset,
        fci_energy=fci,
        one_electron=one,
        two_electron=two,
        initial_state_suggestions=states,
        extras=extras,
    )


def load_document(data: Any) -> BroombridgeDocument:
    """Validate an already-decoded YAML tree."""
    data = _mapping(data, "<root>")
    fmt = _mapping(_require(data, "format", ""), "format")
    version = _require(fmt, "version", "format")
    if str(version) != FORMAT_VERSION or not isinstance(version, (str, float)):
        raise SchemaError("format.version", f"unsupported version {version!r}; expected '0.1'")
    sets = _require(data, "integral_sets", "")
    if not isinstance(sets, list) or not sets:
        raise SchemaError("integral_sets", "expected a non-empty list of problems")
    problems = tuple(_parse_problem(p, f"integral_sets[{i}]") for i, p in enumerate(sets))
    extras = {k: copy.deepcopy(v) for k, v in data.items() if k not in ("format", "integral_sets")}
    fmt_extras = {k: copy.deepcopy(v) for k, v in fmt.items() if k != "version"}
    if fmt_extras:
        extras["__format__"] = fmt_extras
    return BroombridgeDocument(problems=problems, extras=extras)


def parse_document(text: str) -> BroombridgeDocument:
    """Parse and validate Broombridge YAML text.

    Raises:
        DocumentSyntaxError: the text is not valid YAML.
        SchemaError: the YAML does not describe a valid v0.1 document.
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise DocumentSyntaxError(str(exc)) from exc
    return load_document(data)


def validate_text(text: str) -> list[Exception]:
    """Every problem found in ``text``, one error per faulty section.

    Unlike :func:`parse_document`, which stops at the first problem, this
    checks the format block and each integral set independently.
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        return [DocumentSyntaxError(str(exc))]
    errors: list[Exception] = []
    try:
        data = _mapping(data, "<root>")
    except SchemaError as exc:
        return [exc]
    try:
        fmt = _mapping(_require(data, "format", ""), "format")
        version = _require(fmt, "version", "format")
        if str(version) != FORMAT_VERSION or not isinstance(version, (str, float)):
            raise SchemaError("format.version", f"unsupported version {version!r}; expected '0.1'")
    except SchemaError as exc:
        errors.append(exc)
    sets = data.get("integral_sets")
    if not isinstance(sets, list) or not sets:
        errors.append(SchemaError("integral_sets", "expected a non-empty list of problems"))
        return errors
    for i, node in enumerate(sets):
        try:
            _parse_problem(node, f"integral_sets[{i}]")
        except SchemaError as exc:
            errors.append(exc)
    return errors


def read_document(path) -> BroombridgeDocument:
    with open(path, encoding="utf-8") as fh:
        return parse_document(fh.read())


# ---------------------------------------------------------------------------
# serialization


def _quantity(value: float) -> dict:
    return {"units": "hartree", "value": float(value)}


def _problem_to_tree(p: ProblemDescription) -> dict:
    extras = dict(p.extras)
    ham_extras = extras.pop("__hamiltonian__", {})
    tree: dict = {}
    for key in ("metadata", "basis_set", "geometry"):
        if key in extras:
            tree[key] = copy.deepcopy(extras.pop(key))
    tree["coulomb_repulsion"] = _quantity(p.coulomb_repulsion)
    tree["scf_energy"] = _quantity(p.scf_energy)
    tree["energy_offset"] = _quantity(p.energy_offset)
    if p.fci_energy is not None:
        fci = {"units": "hartree"}
        if p.fci_energy.value is not None:
            fci["value"] = float(p.fci_energy.value)
        fci["lower"] = float(p.fci_energy.lower)
        fci["upper"] = float(p.fci_energy.upper)
        tree["fci_energy"] = fci
    tree["n_orbitals"] = int(p.n_orbitals)
    tree["n_electrons"] = int(p.n_electrons)
    tree.update(copy.deepcopy(extras))
    ham = dict(copy.deepcopy(ham_extras))
    ham["one_electron_integrals"] = {
        "units": "hartree",
        "format": "sparse",
        "values": [[p_ + 1, q + 1, float(v)] for (p_, q), v in sorted(p.one_electron.items())],
    }
    ham["two_electron_integrals"] = {
        "index_convention": "mulliken",
        "units": "hartree",
        "format": "sparse",
        "values": [
            [a + 1, b + 1, c + 1, d + 1, float(v)]
            for (a, b, c, d), v in sorted(p.two_electron.items())
        ],
    }
    tree["hamiltonian"] = ham
    states = []
    for s in p.initial_state_suggestions:
        state: dict = {"label": s.label}
        if s.energy is not None:
            state["energy"] = _quantity(s.energy)
        item_extras = {}
        for k, v in s.extras.items():
            if k.startswith("__item__"):
                item_extras[k[len("__item__"):]] = copy.deepcopy(v)
            else:
                state[k] = copy.deepcopy(v)
        state["superposition"] = [
            [float(c), *(op.to_text() for op in ops), VACUUM] for c, ops in s.terms
        ]
        states.append({"state": state, **item_extras})
    tree["initial_state_suggestions"] = states
    return tree


def document_to_tree(doc: BroombridgeDocument) -> dict:
    extras = dict(doc.extras)
    fmt = {"version": doc.format_version, **copy.deepcopy(extras.pop("__format__", {}))}
    tree: dict = {}
    if "$schema" in extras:
        tree["$schema"] = extras.pop("$schema")
    tree["format"] = fmt
    tree.update(copy.deepcopy(extras))
    tree["integral_sets"] = [_problem_to_tree(p) for p in doc.problems]
    return tree


def serialize_document(doc: BroombridgeDocument) -> str:
    """Render ``doc`` as Broombridge YAML. Output is deterministic."""
    return yaml.safe_dump(
        document_to_tree(doc), sort_keys=False, default_flow_style=None, width=120
    )


def write_document(doc: BroombridgeDocument, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_document(doc))


# ---------------------------------------------------------------------------
# comparison


def _round(x: float | None, digits: int = ROUND_TRIP_DIGITS):
    if x is None or x == 0:
        return x
    return float(f"{x:.{digits - 1}e}")


def canonical_form(doc: BroombridgeDocument, digits: int = ROUND_TRIP_DIGITS) -> tuple:
    """Hashable summary of everything the validator checks, rounded to ``digits``."""
    problems = []
    for p in doc.problems:
        fci = None
        if p.fci_energy is not None:
            fci = (_round(p.fci_energy.lower, digits), _round(p.fci_energy.upper, digits),
                   _round(p.fci_energy.value, digits))
        states = tuple(
            (s.label, _round(s.energy, digits),
             tuple((_round(c, digits), ops) for c, ops in s.terms))
            for s in p.initial_state_suggestions
        )
        problems.append((
            p.n_orbitals,
            p.n_electrons,
            _round(p.coulomb_repulsion, digits),
            _round(p.energy_offset, digits),
            _round(p.scf_energy, digits),
            fci,
            tuple((k, _round(v, digits)) for k, v in sorted(p.one_electron.items())),
            tuple((k, _round(v, digits)) for k, v in sorted(p.two_electron.items())),
            states,
        ))
    return (doc.format_version, tuple(problems))


def documents_equivalent(a: BroombridgeDocument, b: BroombridgeDocument) -> bool:
    return canonical_form(a) == canonical_form(b)


# ---------------------------------------------------------------------------
# synthetic instances


def hartree_fock_tokens(n_electrons: int) -> tuple[LadderToken, ...]:
    """Creation string filling the lowest orbitals, alpha before beta."""
    n_alpha = (n_electrons + 1) // 2
    n_beta = n_electrons // 2
    ops = [LadderToken(i, "alpha", "raise") for i in range(n_alpha)]
    ops += [LadderToken(i, "beta", "raise") for i in range(n_beta)]
    return tuple(ops)


def generate_synthetic_problem(
    seed: int, n_orbitals: int, n_electrons: int, density: float = 1.0
) -> BroombridgeDocument:
    """Random but valid single-problem document.

    A ``density`` fraction of the one- and two-electron symmetry classes is
    populated with values uniform in [-1, 1] hartree. The FCI bounds bracket
    the spectrum by the Pauli L1 norm around the Pauli identity coefficient.
    """
    from .hamiltonian import build_fermion_hamiltonian, jordan_wigner, l1_norm

    if n_orbitals < 1:
        raise ArgumentError("n_orbitals must be positive")
    if not 1 <= n_electrons <= 2 * n_orbitals:
        raise ArgumentError(f"n_electrons must lie in [1, {2 * n_orbitals}]")
    if not 0 < density <= 1:
        raise ArgumentError("density must lie in (0, 1]")

    rng = np.random.default_rng(seed)
    one_classes = one_electron_classes(n_orbitals)
    two_classes = two_electron_classes(n_orbitals)

    def pick(classes: Sequence) -> dict:
        k = max(1, int(round(density * len(classes))))
        chosen = sorted(rng.choice(len(classes), size=k, replace=False))
        values = rng.uniform(-1.0, 1.0, size=k)
        return {classes[i]: float(v) for i, v in zip(chosen, values)}

    one = pick(one_classes)
    two = pick(two_classes)
    coulomb = float(rng.uniform(0.0, 1.0))
    hf = InitialStateAnsatz(
        label="|G>",
        terms=((1.0, hartree_fock_tokens(n_electrons)),),
        extras={"method": "sparse_multi_configurational"},
    )
    draft = ProblemDescription(
        n_orbitals=n_orbitals,
        n_electrons=n_electrons,
        coulomb_repulsion=coulomb,
        scf_energy=0.0,
        energy_offset=0.0,
        one_electron=one,
        two_electron=two,
        initial_state_suggestions=(hf,),
        extras={"metadata": {"molecule_name": f"synthetic-{seed}"}},
    )
    fham = build_fermion_hamiltonian(draft)
    pauli = jordan_wigner(fham, max_qubits=None)
    lam = l1_norm(pauli)
    scf = _hf_energy(fham, n_orbitals, n_electrons)
    # |H - c| <= lambda, so these bounds always enclose the spectrum
    c = pauli.identity_coefficient
    problem = dataclasses.replace(
        draft, scf_energy=scf, fci_energy=FciEnergy(lower=c - lam, upper=c + lam)
    )
    return BroombridgeDocument(
        problems=(problem,),
        extras={"$schema": SCHEMA_URL, "generator": {"source": "broomsim-synthetic", "seed": int(seed)}},
    )


def _hf_energy(fham, n_orbitals: int, n_electrons: int) -> float:
    """Diagonal matrix element of the Hamiltonian on the aufbau determinant."""
    n_alpha = (n_electrons + 1) // 2
    n_beta = n_electrons // 2
    occ = set(range(n_alpha)) | {n_orbitals + i for i in range(n_beta)}
    energy = fham.identity_offset
    for (cre, ann), coeff in fham.terms.items():
        if sorted(cre) == sorted(ann) and set(cre) <= occ:
            # a+_p a+_q a_p a_q style terms: canonical order gives sign (-1)
            # only when the creation and annihilation orders differ
            energy += coeff * _diagonal_sign(cre, ann)
    return float(energy)


def _diagonal_sign(cre: Iterable[int], ann: Iterable[int]) -> int:
    cre = list(cre)
    ann = list(ann)
    # cre is descending, ann ascending; the string a+_{c1}..a+_{ck} a_{a1}..a_{ak}
    # on an occupied set equals sign(perm) where perm maps reversed(ann) to cre
    target = list(reversed(ann))
    perm = [target.index(c) for c in cre]
    inversions = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return -1 if inversions % 2 else 1
