"""Robust phase estimation of the Trotterized propagator.

The propagator is ``U = exp(-i H' t)`` with ``H'`` the Hamiltonian minus its
identity part, so an eigenstate with energy ``E`` has eigenphase
``-(E - c) t`` where ``c`` is the identity coefficient. Energies are recovered
by de-aliasing the phase into a window and adding ``c`` back.

Two execution modes:

``circuit``
    A single ancilla controls ``U^(2^(k-1))`` in round ``k``; the ancilla is
    measured in the X and Y bases ``shots_per_round`` times each and the
    system register is *not* re-prepared between shots, so it collapses onto
    an eigenstate as the protocol runs. Round ``k`` refines the running
    estimate by choosing the branch of ``angle / 2^(k-1)`` closest to it.

``projective``
    Samples an eigenvector of the step unitary with Born probability and
    reports its eigenphase plus a uniform error of the protocol's nominal size.
    Above ten qubits the eigenvectors are Ritz vectors of ``H`` from the
    Krylov space of the trial state, and the sampled vector's phase is
    ``arg <v|U|v>``.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .broombridge import ProblemDescription
from .dynamics import TrotterPlan, make_plan, trotter_eigenphases, trotter_step
from .errors import ArgumentError, CapacityError, MultipleSolutions, NoSolution, ZeroOverlap
from .exactdiag import apply_in_sector, sector_basis, spectral_measure
from .hamiltonian import DEFAULT_MAX_QUBITS, PauliHamiltonian, build_fermion_hamiltonian, jordan_wigner
from .simulator import StateVector, expectation, make_rng, measure_qubit, prepare_ansatz

log = logging.getLogger(__name__)

DENSE_STEP_QUBITS = 8
PROJECTIVE_DENSE_QUBITS = 10
CLUSTER_FACTOR = 10.0


@dataclass(frozen=True)
class RpeConfig:
    bits: int = 10
    step_size: float = 0.5
    shots_per_round: int = 100
    mode: str = "circuit"
    seed: int = 0
    order: str = "first"
    max_qubits: int = DEFAULT_MAX_QUBITS
    krylov_dim: int = 300

    def __post_init__(self) -> None:
        if self.bits < 1:
            raise ArgumentError("bits must be >= 1")
        if not self.step_size > 0:
            raise ArgumentError("step size must be positive")
        if self.shots_per_round < 1:
            raise ArgumentError("shots_per_round must be >= 1")
        if self.mode not in ("circuit", "projective"):
            raise ArgumentError(f"unknown mode {self.mode!r}")

    @property
    def error_target(self) -> float:
        """Nominal energy error ``t / 2^(b-1)`` in hartree."""
        return self.step_size / 2 ** (self.bits - 1)


@dataclass
class PhaseEstimate:
    phase: float
    energy: float
    std_error: float
    bits_used: int
    repetitions: int
    seed: int
    step_size: float
    cluster_id: int | None = None


# ---------------------------------------------------------------------------
# phase <-> energy


def wrap_phase(x: float) -> float:
    """Map an angle into (-pi, pi]."""
    y = math.remainder(x, 2 * math.pi)
    return math.pi if y == -math.pi else y


def dealias_energy(phase: float, t: float, window: tuple[float, float]) -> float:
    """The unique ``E`` in ``window`` with ``-E t = phase (mod 2 pi)``.

    Raises:
        MultipleSolutions: the window is at least one period ``2 pi / t`` wide.
        NoSolution: no consistent energy lies in the window.
    """
    lower, upper = window
    period = 2 * math.pi / t
    if upper < lower:
        raise NoSolution(f"empty window [{lower}, {upper}]")
    if upper - lower >= period:
        raise MultipleSolutions(
            f"window width {upper - lower:.6g} is not below the alias period {period:.6g}"
        )
    base = -phase / t
    j = math.ceil((lower - base) / period)
    candidate = base + j * period
    # guard against round-off at the lower edge
    if candidate - period >= lower - 1e-12 * period:
        candidate -= period
    if candidate < lower - 1e-12 * period or candidate > upper + 1e-12 * period:
        raise NoSolution(f"no energy in [{lower}, {upper}] matches phase {phase}")
    return candidate


def default_window(problem: ProblemDescription, t: float, center: float) -> tuple[float, float]:
    """FCI bounds when narrower than one alias period, otherwise a period around ``center``."""
    period = 2 * math.pi / t
    fci = problem.fci_energy
    if fci is not None and fci.upper - fci.lower < period:
        return fci.lower, fci.upper
    half = 0.5 * period * (1 - 1e-9)
    return center - half, center + half


# ---------------------------------------------------------------------------
# execution


class _Propagator:
    """Applies ``U^m`` by repeated steps (diagonal steps are raised elementwise)."""

    def __init__(self, plan: TrotterPlan):
        self.plan = plan
        self.n = plan.n_qubits
        self._diag_powers: dict[int, np.ndarray] = {}
        if plan.is_diagonal:
            self.kind = "diag"
        elif self.n <= DENSE_STEP_QUBITS:
            self.kind = "dense"
            self.matrix = plan.step_matrix
        else:
            self.kind = "layers"

    def power(self, vec: np.ndarray, m: int) -> np.ndarray:
        if self.kind == "diag":
            d = self._diag_powers.get(m)
            if d is None:
                d = self.plan.diagonal ** m
                self._diag_powers[m] = d
            return d * vec
        if self.kind == "dense":
            out = vec
            for _ in range(m):
                out = self.matrix @ out
            return out
        s = StateVector(self.n, vec.copy())
        for _ in range(m):
            trotter_step(s, self.plan, include_identity=False)
        return s.amplitudes


def _angle_std(c: float, s: float, shots: int) -> float:
    c = min(max(c, -1.0), 1.0)
    s = min(max(s, -1.0), 1.0)
    r2 = c * c + s * s
    if r2 == 0:
        return math.pi
    var = (s * s * (1 - c * c) + c * c * (1 - s * s)) / (shots * r2 * r2)
    return math.sqrt(max(var, 1.0 / (2 * shots * shots)))


def run_circuit(
    psi: np.ndarray, plan: TrotterPlan, bits: int, shots: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Run the ancilla protocol on ``psi``; return (phase, phase std error)."""
    n = plan.n_qubits
    prop = _Propagator(plan)
    full = StateVector.zeros(n + 1)
    view = full.amplitudes.reshape(2, 1 << n)  # ancilla is the most significant qubit
    system = np.array(psi, dtype=complex)
    estimate = 0.0
    sigma = math.pi
    inv_sqrt2 = 1 / math.sqrt(2)
    for k in range(1, bits + 1):
        m = 2 ** (k - 1)
        zeros = [0, 0]
        for _ in range(shots):
            for basis in (0, 1):
                a = system * inv_sqrt2
                b = prop.power(system, m) * inv_sqrt2
                if basis:
                    b = b * -1j
                view[0] = (a + b) * inv_sqrt2
                view[1] = (a - b) * inv_sqrt2
                outcome = measure_qubit(full, n, rng)
                system = view[outcome].copy()
                zeros[basis] += outcome == 0
        c = 2 * zeros[0] / shots - 1
        s = 2 * zeros[1] / shots - 1
        angle = math.atan2(s, c)
        if k == 1:
            estimate = angle
        else:
            estimate += wrap_phase(angle - m * estimate) / m
        sigma = _angle_std(c, s, shots) / m
    return wrap_phase(estimate), sigma


@dataclass
class _Setup:
    problem: ProblemDescription
    pauli: PauliHamiltonian
    plan: TrotterPlan
    psi: np.ndarray
    offset: float
    window: tuple[float, float]


def _sector(psi: np.ndarray, n_qubits: int):
    """Particle-number sector holding ``psi``, or None if it mixes sectors."""
    counts = {int(i).bit_count() for i in np.flatnonzero(np.abs(psi) > 0)}
    if len(counts) != 1:
        return None
    return sector_basis(n_qubits, counts.pop())


def _setup(problem: ProblemDescription, label: str, config: RpeConfig) -> _Setup:
    n = problem.n_spin_orbitals
    needed = n + 1 if config.mode == "circuit" else n
    if needed > config.max_qubits:
        raise CapacityError(f"{config.mode} mode needs {needed} qubits, limit is {config.max_qubits}")
    pauli = jordan_wigner(build_fermion_hamiltonian(problem), max_qubits=config.max_qubits)
    prepared = prepare_ansatz(problem, label)
    psi = prepared.state.amplitudes
    plan = make_plan(pauli.without_identity(), config.step_size, config.order)
    basis = _sector(psi, n) if n > PROJECTIVE_DENSE_QUBITS else None
    if basis is not None:
        # cheaper than summing Pauli expectations over the full register
        sub = basis.restrict(psi)
        trial_energy = float(np.real(np.vdot(sub, apply_in_sector(build_fermion_hamiltonian(problem), basis, sub))))
    else:
        trial_energy = expectation(prepared.state, pauli)
    window = default_window(problem, config.step_size, trial_energy)
    return _Setup(problem, pauli, plan, psi, pauli.identity_coefficient, window)


def _projective_spectrum(setup: _Setup, config: RpeConfig):
    """Born probabilities over step eigenvectors and a lazy phase lookup.

    Returns ``(probs, phase_of)`` where ``phase_of(j)`` is the eigenphase
    belonging to ``probs[j]``.
    """
    plan = setup.plan
    if plan.n_qubits <= PROJECTIVE_DENSE_QUBITS:
        phases, vecs = trotter_eigenphases(plan)
        probs = np.abs(vecs.conj().T @ setup.psi) ** 2
        return probs, lambda j: float(phases[j])
    # large registers: the Krylov space of the trial state inside its particle
    # sector gives eigenvectors of H with Born weights; a Ritz vector's step
    # phase is arg <v|U|v>, computed only for the vector actually sampled
    basis = _sector(setup.psi, plan.n_qubits)
    if basis is None:
        raise ArgumentError("trial state mixes particle numbers; projective mode needs a fixed sector")
    _, probs, vecs = spectral_measure(build_fermion_hamiltonian(setup.problem), basis,
                                      basis.restrict(setup.psi), config.krylov_dim)

    def phase_of(j: int) -> float:
        full = basis.embed(vecs[j])
        stepped = trotter_step(StateVector(plan.n_qubits, full.astype(complex)), plan, include_identity=False)
        return float(np.angle(np.vdot(full, stepped.amplitudes)))

    return probs, phase_of


def estimate_phase(problem: ProblemDescription, ansatz_label: str, config: RpeConfig) -> PhaseEstimate:
    """One robust phase estimation run on the labelled trial state."""
    setup = _setup(problem, ansatz_label, config)
    rng = make_rng(config.seed)
    t = config.step_size
    if config.mode == "circuit":
        if np.linalg.norm(setup.psi) == 0:
            raise ZeroOverlap("trial state is zero")
        phase, sigma = run_circuit(setup.psi, setup.plan, config.bits, config.shots_per_round, rng)
        std_error = sigma / t
        energy = dealias_energy(phase, t, _shift(setup.window, -setup.offset)) + setup.offset
    else:
        probs, phase_of = _projective_spectrum(setup, config)
        total = float(np.sum(probs))
        if total < 1e-12:
            raise ZeroOverlap("trial state has no weight on any eigenstate")
        idx = int(rng.choice(len(probs), p=probs / total))
        phase = phase_of(idx)
        exact = dealias_energy(phase, t, _shift(setup.window, -setup.offset)) + setup.offset
        delta = config.error_target
        energy = exact + float(rng.uniform(-delta, delta))
        phase = wrap_phase(-(energy - setup.offset) * t)
        std_error = delta / math.sqrt(3)
    return PhaseEstimate(
        phase=phase,
        energy=energy,
        std_error=std_error,
        bits_used=config.bits,
        repetitions=1,
        seed=config.seed,
        step_size=t,
    )


def _shift(window: tuple[float, float], by: float) -> tuple[float, float]:
    return window[0] + by, window[1] + by


# ---------------------------------------------------------------------------
# repetitions


@dataclass
class ClusterSummary:
    cluster_id: int
    count: int
    mean: float
    std: float | None


@dataclass
class RepetitionSummary:
    estimates: list[PhaseEstimate]
    clusters: list[ClusterSummary] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean([e.energy for e in self.estimates]))

    @property
    def std(self) -> float | None:
        if len(self.estimates) < 2:
            return None
        return float(np.std([e.energy for e in self.estimates], ddof=1))


def repetition_seeds(seed: int, repetitions: int) -> list[int]:
    """Independent integer seeds derived from ``seed``."""
    children = np.random.SeedSequence(seed).spawn(repetitions)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def cluster_energies(energies, gap: float) -> list[int]:
    """Single-linkage clusters with ids ordered by energy."""
    order = np.argsort(energies, kind="stable")
    ids = [0] * len(energies)
    current = 0
    prev = None
    for i in order:
        e = energies[i]
        if prev is not None and e - prev > gap:
            current += 1
        ids[i] = current
        prev = e
    return ids


def _one(args):
    problem, label, config = args
    return estimate_phase(problem, label, config)


def repeat_and_summarize(
    problem: ProblemDescription,
    ansatz_label: str,
    config: RpeConfig,
    repetitions: int,
    threads: int = 1,
) -> RepetitionSummary:
    if repetitions < 1:
        raise ArgumentError("repetitions must be >= 1")
    jobs = [(problem, ansatz_label, replace(config, seed=s)) for s in repetition_seeds(config.seed, repetitions)]
    if threads > 1 and repetitions > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            estimates = list(pool.map(_one, jobs))
    else:
        estimates = [_one(j) for j in jobs]
    for e in estimates:
        e.repetitions = repetitions
    energies = [e.energy for e in estimates]
    ids = cluster_energies(energies, CLUSTER_FACTOR * config.error_target)
    clusters = []
    for cid in sorted(set(ids)):
        members = [energies[i] for i in range(len(ids)) if ids[i] == cid]
        clusters.append(ClusterSummary(
            cluster_id=cid,
            count=len(members),
            mean=float(np.mean(members)),
            std=float(np.std(members, ddof=1)) if len(members) > 1 else None,
        ))
    for e, cid in zip(estimates, ids):
        e.cluster_id = cid
    return RepetitionSummary(estimates=estimates, clusters=clusters)


def estimates_to_csv(estimates) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seed", "t", "bits", "phase", "energy", "std_error", "cluster_id"])
    for e in estimates:
        w.writerow([
            e.seed, repr(float(e.step_size)), e.bits_used, repr(float(e.phase)), repr(float(e.energy)),
            repr(float(e.std_error)), "" if e.cluster_id is None else e.cluster_id,
        ])
    return buf.getvalue()
