"""Shared builders for tests: random operators and hand-made problems."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from broomsim.broombridge import (
    BroombridgeDocument,
    FciEnergy,
    InitialStateAnsatz,
    LadderToken,
    ProblemDescription,
    generate_synthetic_problem,
    hartree_fock_tokens,
)
from broomsim.hamiltonian import PauliHamiltonian, PauliString

DATA = Path(__file__).parent / "data"
LIH_FILE = DATA / "lih_sto3g_synthetic.yaml"


def random_pauli(rng: np.random.Generator, n_qubits: int) -> PauliString:
    while True:
        x = int(rng.integers(0, 1 << n_qubits))
        z = int(rng.integers(0, 1 << n_qubits))
        if x or z:
            return PauliString(x, z)


def random_pauli_hamiltonian(
    rng: np.random.Generator, n_qubits: int, n_terms: int, identity: float = 0.0
) -> PauliHamiltonian:
    h = PauliHamiltonian(n_qubits, identity)
    while len(h.terms) < n_terms:
        h.terms[random_pauli(rng, n_qubits)] = float(rng.uniform(-1, 1))
    return h


def random_state(rng: np.random.Generator, n_qubits: int) -> np.ndarray:
    v = rng.standard_normal(1 << n_qubits) + 1j * rng.standard_normal(1 << n_qubits)
    return v / np.linalg.norm(v)


def synthetic(seed: int, n_orbitals: int, n_electrons: int, density: float = 1.0) -> ProblemDescription:
    return generate_synthetic_problem(seed, n_orbitals, n_electrons, density).problems[0]


def diagonal_problem(
    seed: int, n_orbitals: int, n_electrons: int, window: float = 2.0
) -> tuple[ProblemDescription, float]:
    """A problem built only from h_pp and (pp|qq) integrals.

    Every term is a product of number operators, so the Jordan-Wigner image
    is Z-type (all terms commute) and the aufbau determinant is an
    eigenstate. Returns the problem and that eigenstate's exact energy.
    """
    rng = np.random.default_rng(seed)
    one = {(p, p): float(rng.uniform(-1, 1)) for p in range(n_orbitals)}
    two = {}
    for p in range(n_orbitals):
        for q in range(p, n_orbitals):
            two[(p, p, q, q)] = float(rng.uniform(0, 0.5))
    coulomb = float(rng.uniform(0, 1))
    n_alpha = (n_electrons + 1) // 2
    n_beta = n_electrons // 2
    occ = [(i, 0) for i in range(n_alpha)] + [(i, 1) for i in range(n_beta)]
    energy = coulomb + sum(one[(i, i)] for i, _ in occ)
    for a in range(len(occ)):
        for b in range(len(occ)):
            if a == b:
                continue
            i, j = occ[a][0], occ[b][0]
            energy += 0.5 * two[(min(i, j), min(i, j), max(i, j), max(i, j))]
    hf = InitialStateAnsatz("|G>", ((1.0, hartree_fock_tokens(n_electrons)),))
    problem = ProblemDescription(
        n_orbitals=n_orbitals,
        n_electrons=n_electrons,
        coulomb_repulsion=coulomb,
        scf_energy=energy,
        one_electron=one,
        two_electron=two,
        fci_energy=FciEnergy(energy - window, energy + window),
        initial_state_suggestions=(hf,),
    )
    return problem, energy


def ansatz_from_vector(label: str, vec: np.ndarray, n_orbitals: int, cutoff: float = 1e-12) -> InitialStateAnsatz:
    """Write a real state vector as creation strings on the vacuum.

    Creation operators are listed highest mode first, so applying them right
    to left fills modes in ascending order and every sign is +1.
    """
    terms = []
    for bits in np.flatnonzero(np.abs(vec) > cutoff):
        ops = []
        for mode in range(2 * n_orbitals - 1, -1, -1):
            if (int(bits) >> mode) & 1:
                spin = "alpha" if mode < n_orbitals else "beta"
                ops.append(LadderToken(mode % n_orbitals, spin, "raise"))
        terms.append((float(np.real(vec[bits])), tuple(ops)))
    return InitialStateAnsatz(label, tuple(terms))


def single_problem_document(problem: ProblemDescription) -> BroombridgeDocument:
    return BroombridgeDocument(problems=(problem,))
