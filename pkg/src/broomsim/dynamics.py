"""Product-formula time evolution and the spectral model of the qubitization walk."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import ArgumentError, CapacityError, DimensionError, RangeError, ZeroNorm
from .hamiltonian import PauliHamiltonian, PauliString, l1_norm
from .simulator import StateVector, _z_signs, apply_pauli_exponential

DENSE_STEP_LIMIT = 8
WALK_DENSE_LIMIT = 12
MULTIPLE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class TrotterPlan:
    """One product-formula step ``prod_j exp(-i c_j P_j t)``.

    ``terms`` are applied left to right; :func:`make_plan` sorts them by
    (Pauli weight, x_mask, z_mask).
    """

    n_qubits: int
    terms: tuple[tuple[PauliString, float], ...]
    step_size: float
    order: str = "first"
    identity_coefficient: float = 0.0

    def __post_init__(self) -> None:
        if self.order not in ("first", "second"):
            raise ArgumentError(f"unknown product-formula order {self.order!r}")
        if not self.step_size > 0:
            raise ArgumentError("step size must be positive")

    @property
    def trotter_number(self) -> int:
        return max(1, round(1.0 / self.step_size))

    def rotations(self) -> list[tuple[PauliString, float]]:
        """The exponentials of one step as ``(P, theta)`` with ``exp(-i theta P)``."""
        t = self.step_size
        if self.order == "first":
            return [(p, c * t) for p, c in self.terms]
        half = [(p, c * t / 2) for p, c in self.terms]
        return half + half[::-1]

    @cached_property
    def _layers(self) -> list:
        # runs of diagonal (Z-only) exponentials collapse into one phase vector
        layers: list = []
        diag = None
        for p, theta in self.rotations():
            if p.x_mask == 0:
                phase = theta * _z_signs(self.n_qubits, p.z_mask) if p.z_mask else np.full(1 << self.n_qubits, theta)
                diag = phase if diag is None else diag + phase
            else:
                if diag is not None:
                    layers.append(("diag", np.exp(-1j * diag)))
                    diag = None
                layers.append(("pauli", p, theta))
        if diag is not None:
            layers.append(("diag", np.exp(-1j * diag)))
        return layers

    @property
    def is_diagonal(self) -> bool:
        return all(layer[0] == "diag" for layer in self._layers)

    @cached_property
    def diagonal(self) -> np.ndarray:
        """Phase vector of a step made only of Z-type terms (identity excluded)."""
        d = np.ones(1 << self.n_qubits, dtype=complex)
        for layer in self._layers:
            if layer[0] != "diag":
                raise ValueError("plan contains non-diagonal terms")
            d = d * layer[1]
        return d

    @cached_property
    def step_matrix(self) -> np.ndarray:
        """Dense unitary of one step, identity phase excluded."""
        dim = 1 << self.n_qubits
        cols = []
        for i in range(dim):
            s = StateVector.zeros(self.n_qubits)
            s.amplitudes[i] = 1.0
            _apply_layers(s, self._layers)
            cols.append(s.amplitudes)
        return np.stack(cols, axis=1)


def make_plan(h: PauliHamiltonian, step_size: float, order: str = "first") -> TrotterPlan:
    return TrotterPlan(
        n_qubits=h.n_qubits,
        terms=tuple(h.ordered_terms()),
        step_size=float(step_size),
        order=order,
        identity_coefficient=float(h.identity_coefficient),
    )


def _apply_layers(state: StateVector, layers, inverse: bool = False) -> None:
    seq = reversed(layers) if inverse else layers
    for layer in seq:
        if layer[0] == "diag":
            state.amplitudes *= np.conj(layer[1]) if inverse else layer[1]
        else:
            _, p, theta = layer
            apply_pauli_exponential(state, p, -theta if inverse else theta)


def _check(state: StateVector, plan: TrotterPlan) -> None:
    if state.n_qubits != plan.n_qubits:
        raise DimensionError(f"plan on {plan.n_qubits} qubits, state on {state.n_qubits}")


def trotter_step(state: StateVector, plan: TrotterPlan, include_identity: bool = True) -> StateVector:
    """Apply one product-formula step in place.

    The identity coefficient ``c`` contributes the global phase ``exp(-i c t)``.
    """
    _check(state, plan)
    _apply_layers(state, plan._layers)
    if include_identity and plan.identity_coefficient:
        state.amplitudes *= np.exp(-1j * plan.identity_coefficient * plan.step_size)
    return state


def inverse_trotter_step(state: StateVector, plan: TrotterPlan, include_identity: bool = True) -> StateVector:
    """Apply the adjoint of one step (factors reversed, angles negated)."""
    _check(state, plan)
    _apply_layers(state, plan._layers, inverse=True)
    if include_identity and plan.identity_coefficient:
        state.amplitudes *= np.exp(1j * plan.identity_coefficient * plan.step_size)
    return state


def step_count(total_time: float, step_size: float) -> int:
    ratio = total_time / step_size
    n = round(ratio)
    if abs(ratio - n) > MULTIPLE_TOLERANCE * max(1.0, abs(ratio)):
        raise ArgumentError(f"total time {total_time} is not a multiple of the step {step_size}")
    return n


def evolve(state: StateVector, plan: TrotterPlan, total_time: float) -> StateVector:
    """Repeat the step ``total_time / t`` times; negative times run the adjoint."""
    n = step_count(total_time, plan.step_size)
    step = trotter_step if n >= 0 else inverse_trotter_step
    for _ in range(abs(n)):
        step(state, plan)
    return state


def exact_propagator(h: PauliHamiltonian, time: float) -> np.ndarray:
    return scipy.linalg.expm(-1j * time * h.dense())


def step_error(h: PauliHamiltonian, step_size: float, order: str = "first") -> float:
    """Spectral-norm distance between one step and ``exp(-iHt)``."""
    plan = make_plan(h, step_size, order)
    u = plan.step_matrix * np.exp(-1j * h.identity_coefficient * step_size)
    return float(np.linalg.norm(u - exact_propagator(h, step_size), 2))


def trotter_eigenphases(plan: TrotterPlan) -> tuple[np.ndarray, np.ndarray]:
    """Eigenphases ``phi`` (U v = exp(i phi) v) and eigenvectors of one step."""
    if plan.n_qubits > 10:
        raise CapacityError("dense step diagonalization is limited to 10 qubits")
    # for a normal matrix the complex Schur form is diagonal with unitary Z
    t, z = scipy.linalg.schur(plan.step_matrix, output="complex")
    vals = np.diag(t)
    return np.angle(vals), z


# ---------------------------------------------------------------------------
# qubitization walk (spectral emulation)


@dataclass(frozen=True)
class WalkSpectrum:
    lam: float
    phases: np.ndarray
    identity_offset: float = 0.0

    def energies(self) -> np.ndarray:
        return self.lam * np.sin(self.phases) + self.identity_offset


def walk_eigenphases(h: PauliHamiltonian) -> WalkSpectrum:
    """Eigenphases ``arcsin(E_k / lambda)`` of the walk built from ``h``.

    ``E_k`` are eigenvalues of ``h`` without its identity part and ``lambda``
    is the L1 norm of the non-identity coefficients.
    """
    lam = l1_norm(h)
    if lam == 0:
        raise ZeroNorm("walk operator undefined for a Hamiltonian with zero L1 norm")
    if h.n_qubits > WALK_DENSE_LIMIT:
        raise CapacityError(f"dense walk spectrum is limited to {WALK_DENSE_LIMIT} qubits")
    energies = np.linalg.eigvalsh(h.without_identity().dense())
    ratio = np.clip(energies / lam, -1.0, 1.0)
    return WalkSpectrum(lam=lam, phases=np.arcsin(ratio), identity_offset=h.identity_coefficient)


def energy_from_walk_phase(phi: float, lam: float, identity_offset: float = 0.0) -> float:
    if abs(phi) > math.pi / 2 + 1e-12:
        raise RangeError(f"walk phase {phi} outside [-pi/2, pi/2]")
    return lam * math.sin(phi) + identity_offset
