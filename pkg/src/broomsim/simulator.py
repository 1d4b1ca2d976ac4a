"""Dense state-vector simulation.

Qubit 0 is the least significant bit of the basis index, so a fermionic
occupation bit-set is directly a computational basis index.
"""

from __future__ import annotations

import functools
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .broombridge import LadderToken, ProblemDescription
from .errors import DimensionError, OverlapError, ZeroNorm
from .hamiltonian import IDENTITY, PauliHamiltonian, PauliString, spin_orbital_index

NORM_TOLERANCE = 1e-10


def make_rng(seed: int | np.random.SeedSequence | None) -> np.random.Generator:
    """Seeded PCG64 generator; pass a ``SeedSequence`` to use a spawned stream."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn_seeds(seed: int, count: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(count)


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise DimensionError(
                f"expected {1 << self.n_qubits} amplitudes, got {self.amplitudes.shape}"
            )

    @classmethod
    def zeros(cls, n_qubits: int) -> "StateVector":
        return cls(n_qubits, np.zeros(1 << n_qubits, dtype=complex))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = NORM_TOLERANCE) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def normalize(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0:
            raise ZeroNorm("cannot normalize the zero vector")
        self.amplitudes /= nrm
        return self

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def to_csv(self, cutoff: float = 0.0) -> str:
        buf = io.StringIO()
        buf.write("index,re,im\n")
        for i, a in enumerate(self.amplitudes):
            if abs(a) > cutoff:
                buf.write(f"{i},{float(a.real)!r},{float(a.imag)!r}\n")
        return buf.getvalue()


@dataclass
class PreparedState:
    state: StateVector
    source_label: str
    configuration_count: int


# ---------------------------------------------------------------------------
# Pauli action


@functools.lru_cache(maxsize=32)
def _indices(n_qubits: int) -> np.ndarray:
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    idx.flags.writeable = False
    return idx


def _z_signs(n_qubits: int, z_mask: int) -> np.ndarray:
    parity = np.bitwise_count(_indices(n_qubits) & z_mask) & 1
    return 1.0 - 2.0 * parity


_SIGN = np.array([1.0, -1.0])


def _axes(n_qubits: int, mask: int) -> list[int]:
    # qubit q is axis n-1-q when the register is viewed as a (2,)*n tensor
    return [n_qubits - 1 - q for q in range(n_qubits) if (mask >> q) & 1]


def apply_pauli(amplitudes: np.ndarray, p: PauliString, n_qubits: int) -> np.ndarray:
    """Return ``P @ amplitudes`` without modifying the input.

    ``(P f)[i] = phase * s(i ^ x) * f[i ^ x]`` with ``s(j) = (-1)^{|j & z|}``;
    the bit flips are axis reversals of the tensor view, so one pass suffices.
    """
    phase = (1, 1j, -1, -1j)[(p.x_mask & p.z_mask).bit_count() % 4]
    if n_qubits == 0:
        return phase * np.array(amplitudes, copy=True)
    shape = (2,) * n_qubits
    factor = np.full((1,) * n_qubits, phase, dtype=complex)
    for axis in _axes(n_qubits, p.z_mask):
        sign = np.ones(n_qubits, dtype=int)
        sign[axis] = 2
        factor = factor * _SIGN.reshape(sign)
    view = amplitudes.reshape(shape)
    flips = _axes(n_qubits, p.x_mask)
    if flips:
        view = np.flip(view, flips)
        factor = np.flip(factor, flips)
    return np.multiply(view, factor).reshape(-1)


def pauli_matrix(p: PauliString, n_qubits: int) -> np.ndarray:
    dim = 1 << n_qubits
    return np.stack([apply_pauli(col, p, n_qubits) for col in np.eye(dim, dtype=complex)], axis=1)


def _check_support(p: PauliString, n_qubits: int) -> None:
    if p.support >> n_qubits:
        raise DimensionError(f"Pauli string acts outside {n_qubits} qubits")


def apply_pauli_exponential(state: StateVector, p: PauliString, theta: float) -> StateVector:
    """In place ``state <- exp(-i theta P) state``."""
    _check_support(p, state.n_qubits)
    amps = state.amplitudes
    if p == IDENTITY:
        amps *= np.exp(-1j * theta)
        return state
    if p.x_mask == 0:
        # diagonal: each amplitude picks up exp(-i theta (+-1))
        signs = _z_signs(state.n_qubits, p.z_mask)
        amps *= np.exp(-1j * theta * signs)
        return state
    pa = apply_pauli(amps, p, state.n_qubits)
    amps *= math.cos(theta)
    amps += (-1j * math.sin(theta)) * pa
    return state


def apply_controlled_pauli_exponential(
    state: StateVector, control_qubit: int, p: PauliString, theta: float
) -> StateVector:
    """Apply ``exp(-i theta P)`` on the subspace where ``control_qubit`` is 1."""
    _check_support(p, state.n_qubits)
    if not 0 <= control_qubit < state.n_qubits:
        raise DimensionError(f"control qubit {control_qubit} outside register")
    if (p.support >> control_qubit) & 1:
        raise OverlapError(f"control qubit {control_qubit} lies in the support of the Pauli string")
    n = state.n_qubits
    # view the register as (rest-high, control, rest-low) and act on control=1 only
    view = state.amplitudes.reshape(1 << (n - control_qubit - 1), 2, 1 << control_qubit)
    sub = view[:, 1, :].reshape(-1)
    low = (1 << control_qubit) - 1
    reduced = PauliString(
        (p.x_mask & low) | ((p.x_mask >> (control_qubit + 1)) << control_qubit),
        (p.z_mask & low) | ((p.z_mask >> (control_qubit + 1)) << control_qubit),
    )
    sub_state = StateVector(n - 1, sub)
    apply_pauli_exponential(sub_state, reduced, theta)
    view[:, 1, :] = sub_state.amplitudes.reshape(view[:, 1, :].shape)
    return state


# ---------------------------------------------------------------------------
# preparation


def prepare_basis_state(n_qubits: int, occupation: int) -> StateVector:
    if occupation < 0 or occupation >> n_qubits:
        raise DimensionError(f"occupation {occupation:#b} does not fit in {n_qubits} qubits")
    s = StateVector.zeros(n_qubits)
    s.amplitudes[occupation] = 1.0
    return s


def apply_ladder(bits: int, mode: int, create: bool) -> tuple[int, int] | None:
    """Act with one ladder operator on an occupation bit-set.

    Returns ``(sign, new_bits)`` or None if the result vanishes.
    """
    bit = 1 << mode
    if bool(bits & bit) == create:
        return None
    sign = -1 if (bits & (bit - 1)).bit_count() & 1 else 1
    return sign, bits ^ bit


def apply_ladder_string(tokens: Sequence[LadderToken], n_orbitals: int, bits: int = 0) -> tuple[int, int] | None:
    """Apply ``tokens`` (rightmost first) to the occupation ``bits``."""
    sign = 1
    for tok in reversed(tokens):
        mode = spin_orbital_index(tok.orbital, tok.spin, n_orbitals)
        res = apply_ladder(bits, mode, tok.kind == "raise")
        if res is None:
            return None
        s, bits = res
        sign *= s
    return sign, bits


def prepare_ansatz(problem: ProblemDescription, label: str) -> PreparedState:
    """Prepare the labelled trial state, normalized to one.

    Raises:
        UnknownLabel: no such initial state.
        ZeroNorm: every configuration vanishes.
    """
    ansatz = problem.ansatz(label)
    n_qubits = problem.n_spin_orbitals
    amplitudes: dict[int, float] = {}
    for coeff, tokens in ansatz.terms:
        res = apply_ladder_string(tokens, problem.n_orbitals)
        if res is None:
            continue
        sign, bits = res
        amplitudes[bits] = amplitudes.get(bits, 0.0) + sign * coeff
    amplitudes = {b: a for b, a in amplitudes.items() if a != 0.0}
    if not amplitudes:
        raise ZeroNorm(f"initial state {label!r} annihilates to zero")
    state = StateVector.zeros(n_qubits)
    for bits, a in amplitudes.items():
        state.amplitudes[bits] = a
    state.normalize()
    return PreparedState(state=state, source_label=label, configuration_count=len(amplitudes))


# ---------------------------------------------------------------------------
# observables


def _check_same(a: StateVector, b: StateVector) -> None:
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"{a.n_qubits} vs {b.n_qubits} qubits")


def overlap(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``."""
    _check_same(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def expectation(state: StateVector, h: PauliHamiltonian) -> float:
    if h.n_qubits != state.n_qubits:
        raise DimensionError(f"Hamiltonian on {h.n_qubits} qubits, state on {state.n_qubits}")
    total = 0j
    amps = state.amplitudes
    for p, c in h.terms.items():
        total += c * np.vdot(amps, apply_pauli(amps, p, state.n_qubits))
    value = total + h.identity_coefficient * np.vdot(amps, amps)
    if abs(value.imag) > 1e-10:
        raise ValueError(f"expectation value has imaginary part {value.imag:.3e}")
    return float(value.real)


def measure_qubit(state: StateVector, qubit: int, rng: np.random.Generator) -> int:
    """Projective Z measurement; the state collapses in place."""
    if not 0 <= qubit < state.n_qubits:
        raise DimensionError(f"qubit {qubit} outside register")
    view = state.amplitudes.reshape(-1, 2, 1 << qubit)
    p1 = float(np.sum(np.abs(view[:, 1, :]) ** 2))
    p1 = min(max(p1 / state.norm() ** 2, 0.0), 1.0)
    outcome = int(rng.random() < p1)
    view[:, 1 - outcome, :] = 0.0
    state.normalize()
    return outcome
