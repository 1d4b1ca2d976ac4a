"""Brute-force reference spectra.

Two independent routes: dense ladder-operator matrices built from Kronecker
products (tiny systems), and matrix-free products in a fixed particle-number
sector feeding a Lanczos solver (up to about 20 spin-orbitals).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ArgumentError, CapacityError, ConvergenceError, DimensionError
from .hamiltonian import FermionHamiltonian
from .simulator import make_rng

DENSE_LIMIT = 10
DEFAULT_TOL = 1e-9

_SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]])  # |0><1|: removes an occupied mode
_Z = np.diag([1.0, -1.0])
_I = np.eye(2)


def ladder_matrix(p: int, n: int, create: bool = False) -> np.ndarray:
    """Dense ``a_p`` (or ``a+_p``) on ``n`` modes, qubit 0 least significant."""
    if not 0 <= p < n:
        raise ArgumentError(f"mode {p} outside [0, {n})")
    op = np.ones((1, 1))
    # np.kron puts its left factor on the more significant bits
    for q in range(n - 1, -1, -1):
        factor = _Z if q < p else (_SIGMA_MINUS if q == p else _I)
        op = np.kron(op, factor)
    return op.T.copy() if create else op


def dense_fermionic_matrix(h: FermionHamiltonian, limit: int = DENSE_LIMIT) -> np.ndarray:
    """Full ``2^n x 2^n`` matrix of ``h`` from explicit ladder matrices."""
    n = h.n_spin_orbitals
    if n > limit:
        raise CapacityError(f"{n} modes exceed the dense limit of {limit}")
    dim = 1 << n
    ann = [ladder_matrix(p, n) for p in range(n)]
    m = h.identity_offset * np.eye(dim, dtype=complex)
    for (cre, anns), coeff in h.terms.items():
        term = np.eye(dim)
        for p in cre:
            term = term @ ann[p].T
        for q in anns:
            term = term @ ann[q]
        m += coeff * term
    return m


# ---------------------------------------------------------------------------
# particle-number sectors


@dataclass
class SectorBasis:
    n_spin_orbitals: int
    n_particles: int
    states: np.ndarray  # ascending occupation bit-sets

    def __len__(self) -> int:
        return len(self.states)

    def rank(self, bits) -> np.ndarray:
        """Position of each bit-set in ``states`` (-1 if absent)."""
        bits = np.asarray(bits, dtype=np.int64)
        pos = np.searchsorted(self.states, bits)
        pos = np.minimum(pos, len(self.states) - 1)
        return np.where(self.states[pos] == bits, pos, -1)

    def embed(self, v: np.ndarray) -> np.ndarray:
        """Scatter a sector vector into the full ``2^n`` space."""
        full = np.zeros(1 << self.n_spin_orbitals, dtype=np.result_type(v, complex))
        full[self.states] = v
        return full

    def restrict(self, full: np.ndarray) -> np.ndarray:
        return np.asarray(full)[self.states]


def _combination_states(n: int, k: int) -> np.ndarray:
    """All n-bit integers with k set bits, ascending (Gosper's hack)."""
    count = math.comb(n, k)
    out = np.empty(count, dtype=np.int64)
    if k == 0:
        out[0] = 0
        return out
    x = (1 << k) - 1
    for i in range(count):
        out[i] = x
        c = x & -x
        r = x + c
        x = (((r ^ x) >> 2) // c) | r
    return out


def sector_basis(n_spin_orbitals: int, n_particles: int) -> SectorBasis:
    if n_spin_orbitals < 0 or not 0 <= n_particles <= n_spin_orbitals:
        raise ArgumentError(
            f"need 0 <= n_particles <= n_spin_orbitals, got {n_particles}, {n_spin_orbitals}"
        )
    if n_spin_orbitals > 62:
        raise CapacityError("bit-set basis is limited to 62 modes")
    return SectorBasis(n_spin_orbitals, n_particles, _combination_states(n_spin_orbitals, n_particles))


def _apply_string(states: np.ndarray, modes, create: bool, signs: np.ndarray, alive: np.ndarray):
    for p in modes:
        bit = np.int64(1) << np.int64(p)
        occupied = (states & bit) != 0
        alive &= ~occupied if create else occupied
        below = np.bitwise_count(states & (bit - 1)) & 1
        signs *= 1 - 2 * below.astype(np.int8)
        states ^= bit


def sector_matrix(h: FermionHamiltonian, basis: SectorBasis) -> sp.csr_matrix:
    """Sparse matrix of ``h`` restricted to ``basis`` (term-by-term assembly)."""
    if not h.conserves_particles():
        raise ArgumentError("Hamiltonian does not conserve particle number")
    if h.n_spin_orbitals != basis.n_spin_orbitals:
        raise DimensionError("Hamiltonian and basis disagree on the number of modes")
    dim = len(basis)
    rows, cols, vals = [], [], []
    col_index = np.arange(dim)
    for (cre, ann), coeff in h.terms.items():
        states = basis.states.copy()
        signs = np.ones(dim, dtype=np.int8)
        alive = np.ones(dim, dtype=bool)
        # operators act right to left: last annihilator first
        _apply_string(states, reversed(ann), False, signs, alive)
        _apply_string(states, reversed(cre), True, signs, alive)
        if not alive.any():
            continue
        target = basis.rank(states[alive])
        rows.append(target)
        cols.append(col_index[alive])
        vals.append(coeff * signs[alive].astype(float))
    if h.identity_offset:
        rows.append(col_index)
        cols.append(col_index)
        vals.append(np.full(dim, h.identity_offset))
    if not rows:
        return sp.csr_matrix((dim, dim))
    m = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    return m.tocsr()


def apply_in_sector(h: FermionHamiltonian, basis: SectorBasis, v: np.ndarray) -> np.ndarray:
    """``H v`` for a vector expressed in ``basis``."""
    v = np.asarray(v)
    if v.shape != (len(basis),):
        raise DimensionError(f"vector of shape {v.shape} does not match sector of size {len(basis)}")
    return sector_matrix(h, basis) @ v


# ---------------------------------------------------------------------------
# Lanczos


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    residual_norms: np.ndarray
    eigenvectors: np.ndarray | None = None
    seed: int | None = None
    iterations: list[int] = field(default_factory=list)


def _lanczos_lowest(matvec, dim, start, locked, tol, max_iter, dtype):
    """One Lanczos run for the lowest eigenpair orthogonal to ``locked``."""
    basis = np.zeros((min(max_iter, dim) + 1, dim), dtype=dtype)
    alphas, betas = [], []

    def orth(w, upto):
        # two passes of classical Gram-Schmidt keep the basis orthogonal to machine precision
        for _ in range(2):
            if locked is not None and len(locked):
                w = w - locked.T @ (locked.conj() @ w)
            w = w - basis[:upto].T @ (basis[:upto].conj() @ w)
        return w

    q = orth(start, 0)
    nq = np.linalg.norm(q)
    if nq == 0:
        raise ConvergenceError("start vector lies in the locked subspace")
    basis[0] = q / nq
    norm_est = 0.0
    m = 0
    for j in range(min(max_iter, dim)):
        w = matvec(basis[j])
        a = float(np.real(np.vdot(basis[j], w)))
        alphas.append(a)
        w = orth(w, j + 1)
        b = float(np.linalg.norm(w))
        m = j + 1
        t = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
        evals, evecs = np.linalg.eigh(t)
        norm_est = max(norm_est, float(np.max(np.abs(evals))), abs(a))
        resid = abs(b * evecs[-1, 0])
        remaining = dim - (0 if locked is None else len(locked))
        if resid <= tol * max(norm_est, 1.0) or b <= 1e-14 * max(norm_est, 1.0) or m >= remaining:
            vec = evecs[:, 0] @ basis[:m]
            return evals[0], vec / np.linalg.norm(vec), resid, m
        betas.append(b)
        basis[j + 1] = w / b
    raise ConvergenceError(f"Lanczos did not converge within {max_iter} iterations")


def lanczos_extremal(
    h: FermionHamiltonian | sp.spmatrix,
    basis: SectorBasis,
    k: int = 1,
    tol: float = DEFAULT_TOL,
    max_iter: int = 500,
    seed: int = 0,
    return_vectors: bool = False,
) -> SpectrumResult:
    """Lowest ``k`` eigenvalues in a sector by Lanczos with full reorthogonalization.

    Eigenpairs are found one at a time; each converged vector is locked and
    the next run is kept orthogonal to it, so degenerate copies are resolved.
    The residual of every reported pair satisfies ``|Hx - lx| <= tol * |H|``.
    """
    dim = len(basis)
    if not 1 <= k <= dim:
        raise ArgumentError(f"requested {k} eigenvalues from a sector of dimension {dim}")
    mat = h if sp.issparse(h) else sector_matrix(h, basis)
    rng = make_rng(seed)
    dtype = complex if np.iscomplexobj(mat.data) else float
    vals, vecs, res, iters = [], [], [], []
    if dim == 1:
        vals = [float(np.real(mat.toarray()[0, 0]))]
        vecs = [np.ones(1, dtype=dtype)]
        res = [0.0]
        iters = [1]
    else:
        for _ in range(k):
            start = rng.standard_normal(dim).astype(dtype)
            locked = np.array(vecs) if vecs else None
            lam, vec, r, m = _lanczos_lowest(lambda x: mat @ x, dim, start, locked, tol, max_iter, dtype)
            # true residual, independent of the tridiagonal estimate
            r_true = float(np.linalg.norm(mat @ vec - lam * vec))
            vals.append(float(lam))
            vecs.append(vec)
            res.append(r_true)
            iters.append(m)
    order = np.argsort(vals, kind="stable")
    return SpectrumResult(
        eigenvalues=np.asarray(vals)[order],
        residual_norms=np.asarray(res)[order],
        eigenvectors=np.asarray(vecs)[order] if return_vectors else None,
        seed=seed,
        iterations=[iters[i] for i in order],
    )


def spectral_measure(
    h: FermionHamiltonian | sp.spmatrix, basis: SectorBasis, v: np.ndarray, max_dim: int = 300
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Ritz values, weights and Ritz vectors of the Krylov space started at ``v``.

    The weights ``|<y_j|v>|^2`` sum to ``|v|^2`` and their first ``2m - 1``
    moments match those of the exact spectral measure of ``v``. Once the
    Krylov space is invariant (or ``max_dim`` reaches the sector dimension)
    the decomposition is exact. Rows of the returned vector array are the
    Ritz vectors in ``basis``.
    """
    mat = h if sp.issparse(h) else sector_matrix(h, basis)
    v = np.asarray(v)
    if v.shape != (len(basis),):
        raise DimensionError(f"vector of shape {v.shape} does not match sector of size {len(basis)}")
    norm = float(np.linalg.norm(v))
    if norm == 0:
        raise ArgumentError("start vector is zero")
    dtype = complex if np.iscomplexobj(v) or np.iscomplexobj(mat.data) else float
    m_max = min(max_dim, len(basis))
    q = np.zeros((m_max, len(basis)), dtype=dtype)
    q[0] = v / norm
    alphas, betas = [], []
    scale = 1.0
    for j in range(m_max):
        w = mat @ q[j]
        alphas.append(float(np.real(np.vdot(q[j], w))))
        for _ in range(2):
            w = w - q[: j + 1].T @ (q[: j + 1].conj() @ w)
        b = float(np.linalg.norm(w))
        scale = max(scale, abs(alphas[-1]), b)
        if j + 1 == m_max or b <= 1e-12 * scale:
            break
        betas.append(b)
        q[j + 1] = w / b
    m = len(alphas)
    t = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
    theta, y = np.linalg.eigh(t)
    weights = norm**2 * np.abs(y[0]) ** 2
    return theta, weights, y.T @ q[:m]


def dense_sector_spectrum(h: FermionHamiltonian, basis: SectorBasis) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of the sector matrix (small sectors only)."""
    return np.linalg.eigh(sector_matrix(h, basis).toarray())
