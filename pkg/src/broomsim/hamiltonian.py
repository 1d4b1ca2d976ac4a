"""Second-quantized Hamiltonians and their Jordan-Wigner images.

Spin-orbitals are flattened in block order: ``i = orbital`` for alpha and
``i = orbital + n_orbitals`` for beta. Qubit ``i`` holds spin-orbital ``i``;
``|1>`` means occupied.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

from .broombridge import ProblemDescription, two_electron_images
from .errors import CapacityError

DEFAULT_MAX_QUBITS = 24
BUILD_DROP_THRESHOLD = 1e-12

# A canonical fermion operator string: (creations descending, annihilations ascending).
TermKey = tuple[tuple[int, ...], tuple[int, ...]]


def spin_orbital_index(orbital: int, spin: str, n_orbitals: int) -> int:
    if spin not in ("alpha", "beta"):
        raise ValueError(f"unknown spin {spin!r}")
    return orbital + (n_orbitals if spin == "beta" else 0)


def _sort_sign(seq: list[int], descending: bool) -> tuple[tuple[int, ...], int] | None:
    """Bubble ``seq`` into strict order, tracking the fermionic sign.

    Returns None when an index repeats (the product of two identical
    creation or annihilation operators vanishes).
    """
    items = list(seq)
    if len(set(items)) != len(items):
        return None
    sign = 1
    n = len(items)
    for i in range(n):
        for j in range(n - 1 - i):
            a, b = items[j], items[j + 1]
            if (a < b) if descending else (a > b):
                items[j], items[j + 1] = b, a
                sign = -sign
    return tuple(items), sign


def canonical_term(creations: Iterable[int], annihilations: Iterable[int]) -> tuple[TermKey, int] | None:
    """Canonical key and sign for ``a+_{c1} a+_{c2}.. a_{a1} a_{a2}..``.

    The input must already be normal ordered (all creations on the left).
    """
    cre = _sort_sign(list(creations), descending=True)
    ann = _sort_sign(list(annihilations), descending=False)
    if cre is None or ann is None:
        return None
    return (cre[0], ann[0]), cre[1] * ann[1]


@dataclass
class FermionHamiltonian:
    """Normal-ordered fermionic operator with real coefficients (hartree)."""

    n_spin_orbitals: int
    identity_offset: float = 0.0
    terms: dict[TermKey, float] = field(default_factory=dict)

    def add(self, creations: Iterable[int], annihilations: Iterable[int], coeff: float) -> None:
        canon = canonical_term(creations, annihilations)
        if canon is None:
            return
        key, sign = canon
        for i in (*key[0], *key[1]):
            if not 0 <= i < self.n_spin_orbitals:
                raise IndexError(f"spin-orbital {i} outside [0, {self.n_spin_orbitals})")
        self.terms[key] = self.terms.get(key, 0.0) + sign * coeff

    def prune(self, threshold: float = BUILD_DROP_THRESHOLD) -> "FermionHamiltonian":
        self.terms = {k: v for k, v in self.terms.items() if abs(v) >= threshold}
        return self

    def adjoint_key(self, key: TermKey) -> tuple[TermKey, int]:
        cre, ann = key
        canon = canonical_term(reversed(ann), reversed(cre))
        assert canon is not None
        return canon

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        for key, value in self.terms.items():
            adj, sign = self.adjoint_key(key)
            if abs(self.terms.get(adj, 0.0) * sign - value) > tol:
                return False
        return True

    def conserves_particles(self) -> bool:
        return all(len(c) == len(a) for c, a in self.terms)

    def scaled(self, alpha: float) -> "FermionHamiltonian":
        return FermionHamiltonian(
            self.n_spin_orbitals,
            alpha * self.identity_offset,
            {k: alpha * v for k, v in self.terms.items()},
        )


def build_fermion_hamiltonian(problem: ProblemDescription) -> FermionHamiltonian:
    """Assemble the electronic Hamiltonian of ``problem``.

    The Mulliken integral ``(pq|rs)`` couples electron 1 in ``p, q`` with
    electron 2 in ``r, s``; it enters as

        1/2 (pq|rs) a+_{p s1} a+_{r s2} a_{s s2} a_{q s1}

    summed over all eight symmetry images and both spins ``s1, s2``. This is
    the only place the Mulliken-to-operator reindexing lives.
    """
    n = problem.n_orbitals
    h = FermionHamiltonian(2 * n, identity_offset=problem.identity_offset)

    def check(*idx: int) -> None:
        for i in idx:
            if not 0 <= i < n:
                raise IndexError(f"orbital {i} outside [0, {n})")

    for (p, q), value in problem.one_electron.items():
        check(p, q)
        pairs = {(p, q), (q, p)}
        for a, b in pairs:
            for spin in (0, n):
                h.add([a + spin], [b + spin], value)

    for key, value in problem.two_electron.items():
        check(*key)
        for p, q, r, s in set(two_electron_images(*key)):
            for s1 in (0, n):
                for s2 in (0, n):
                    h.add([p + s1, r + s2], [s + s2, q + s1], 0.5 * value)

    return h.prune()


# ---------------------------------------------------------------------------
# Pauli algebra


@dataclass(frozen=True, order=True)
class PauliString:
    """Tensor product of single-qubit Paulis as an (x, z) bit-set pair.

    Per qubit: (0,0)=I, (1,0)=X, (1,1)=Y, (0,1)=Z.
    """

    x_mask: int
    z_mask: int

    @property
    def weight(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()

    @property
    def support(self) -> int:
        return self.x_mask | self.z_mask

    def label(self, n_qubits: int) -> str:
        chars = []
        for q in range(n_qubits):
            x = (self.x_mask >> q) & 1
            z = (self.z_mask >> q) & 1
            chars.append("IZXY"[2 * x + z])
        return "".join(chars)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        x = z = 0
        for q, ch in enumerate(label.upper()):
            if ch in "XY":
                x |= 1 << q
            if ch in "ZY":
                z |= 1 << q
            if ch not in "IXYZ":
                raise ValueError(f"bad Pauli character {ch!r}")
        return cls(x, z)

    @classmethod
    def single(cls, kind: str, qubit: int) -> "PauliString":
        bit = 1 << qubit
        return cls(bit if kind in "XY" else 0, bit if kind in "ZY" else 0)

    def __str__(self) -> str:
        n = max(self.support.bit_length(), 1)
        return self.label(n)


IDENTITY = PauliString(0, 0)


def pauli_product(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Return ``(phase, c)`` with ``a @ b == phase * c``."""
    # With Y = iXZ every string is i^{|x&z|} X^x Z^z, and
    # X^x1 Z^z1 X^x2 Z^z2 = (-1)^{|z1&x2|} X^{x1^x2} Z^{z1^z2}.
    x = a.x_mask ^ b.x_mask
    z = a.z_mask ^ b.z_mask
    k = (
        (a.x_mask & a.z_mask).bit_count()
        + (b.x_mask & b.z_mask).bit_count()
        + 2 * (a.z_mask & b.x_mask).bit_count()
        - (x & z).bit_count()
    ) % 4
    return (1, 1j, -1, -1j)[k], PauliString(x, z)


def _ladder(p: int, create: bool) -> list[tuple[complex, PauliString]]:
    below = (1 << p) - 1
    bit = 1 << p
    # a_p = Z_{<p} (X_p + iY_p)/2, a+_p = Z_{<p} (X_p - iY_p)/2
    return [
        (0.5, PauliString(bit, below)),
        ((-0.5j if create else 0.5j), PauliString(bit, below | bit)),
    ]


@dataclass
class PauliHamiltonian:
    """Real linear combination of Pauli strings plus an identity coefficient."""

    n_qubits: int
    identity_coefficient: float = 0.0
    terms: dict[PauliString, float] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.terms)

    def items(self) -> Iterator[tuple[PauliString, float]]:
        return iter(self.terms.items())

    def scaled(self, alpha: float) -> "PauliHamiltonian":
        return PauliHamiltonian(
            self.n_qubits,
            alpha * self.identity_coefficient,
            {p: alpha * c for p, c in self.terms.items()},
        )

    def without_identity(self) -> "PauliHamiltonian":
        return PauliHamiltonian(self.n_qubits, 0.0, dict(self.terms))

    def ordered_terms(self) -> list[tuple[PauliString, float]]:
        """Terms sorted by (weight, x_mask, z_mask)."""
        return sorted(self.terms.items(), key=lambda kv: (kv[0].weight, kv[0].x_mask, kv[0].z_mask))

    def dense(self) -> np.ndarray:
        from .simulator import pauli_matrix

        dim = 1 << self.n_qubits
        m = self.identity_coefficient * np.eye(dim, dtype=complex)
        for p, c in self.terms.items():
            m += c * pauli_matrix(p, self.n_qubits)
        return m

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pauli_string", "coefficient"])
        w.writerow([IDENTITY.label(self.n_qubits), repr(float(self.identity_coefficient))])
        for p, c in self.ordered_terms():
            w.writerow([p.label(self.n_qubits), repr(float(c))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PauliHamiltonian":
        rows = list(csv.reader(io.StringIO(text)))
        if rows and rows[0] == ["pauli_string", "coefficient"]:
            rows = rows[1:]
        if not rows:
            raise ValueError("no Pauli terms")
        n = len(rows[0][0])
        h = cls(n)
        for label, coeff in rows:
            if len(label) != n:
                raise ValueError(f"inconsistent Pauli string length in {label!r}")
            p = PauliString.from_label(label)
            if p == IDENTITY:
                h.identity_coefficient += float(coeff)
            else:
                h.terms[p] = h.terms.get(p, 0.0) + float(coeff)
        return h


def jordan_wigner(
    h: FermionHamiltonian, max_qubits: int | None = DEFAULT_MAX_QUBITS
) -> PauliHamiltonian:
    """Map a Hermitian fermionic operator to qubits.

    Raises:
        CapacityError: ``h`` needs more than ``max_qubits`` qubits.
    """
    n = h.n_spin_orbitals
    if max_qubits is not None and n > max_qubits:
        raise CapacityError(f"{n} qubits requested, limit is {max_qubits}")
    acc: dict[PauliString, complex] = {}
    for (cre, ann), coeff in h.terms.items():
        factors = [_ladder(p, True) for p in cre] + [_ladder(q, False) for q in ann]
        partial: dict[PauliString, complex] = {IDENTITY: complex(coeff)}
        for factor in factors:
            nxt: dict[PauliString, complex] = {}
            for p1, c1 in partial.items():
                for c2, p2 in factor:
                    phase, p3 = pauli_product(p1, p2)
                    nxt[p3] = nxt.get(p3, 0) + c1 * c2 * phase
            partial = nxt
        for p, c in partial.items():
            acc[p] = acc.get(p, 0) + c
    out = PauliHamiltonian(n, identity_coefficient=float(h.identity_offset))
    for p, c in acc.items():
        if abs(c.imag) > 1e-9 * max(1.0, abs(c.real)):
            raise ValueError(f"non-Hermitian input: imaginary coefficient on {p.label(n)}")
        if abs(c.real) < BUILD_DROP_THRESHOLD:
            continue
        if p == IDENTITY:
            out.identity_coefficient += c.real
        else:
            out.terms[p] = c.real
    return out


def l1_norm(h: PauliHamiltonian) -> float:
    """Sum of absolute non-identity coefficients."""
    return float(sum(abs(c) for c in h.terms.values()))


def truncate_terms(h: PauliHamiltonian, threshold: float) -> PauliHamiltonian:
    """Drop terms with ``|c| < threshold``; the identity coefficient is kept."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    return PauliHamiltonian(
        h.n_qubits,
        h.identity_coefficient,
        {p: c for p, c in h.terms.items() if abs(c) >= threshold},
    )


def pauli_hamiltonian_from_problem(
    problem: ProblemDescription, max_qubits: int | None = DEFAULT_MAX_QUBITS
) -> PauliHamiltonian:
    return jordan_wigner(build_fermion_hamiltonian(problem), max_qubits=max_qubits)


def from_mapping(n_qubits: int, terms: Mapping[str, float], identity: float = 0.0) -> PauliHamiltonian:
    """Build from labels such as ``{"XZ": 0.3, "IY": -0.1}`` (qubit 0 leftmost)."""
    h = PauliHamiltonian(n_qubits, identity)
    for label, c in terms.items():
        p = PauliString.from_label(label.ljust(n_qubits, "I"))
        if p == IDENTITY:
            h.identity_coefficient += c
        else:
            h.terms[p] = h.terms.get(p, 0.0) + c
    return h
