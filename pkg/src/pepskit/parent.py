"""Frustration-free parent Hamiltonians for 1D chains and their gap scans.

Each local term projects onto the orthogonal complement of a blocked
window's image, so the chain state is annihilated term by term. Prefix
Hamiltonians treat the dangling right virtual leg as an extra physical leg,
making every prefix state the unique ground state of its own Hamiltonian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ArgumentError, NotInjectiveError, NumericalError, SizeBudgetError
from .lattice import LatticeSpec
from .peps import INJECTIVITY_RTOL, PepsState, SiteTensor, block, build_state_vector

__all__ = ["LocalTerm", "GapReport", "parent_terms", "assemble_and_gap", "uniform_gap_scan"]

# Full dense spectra below this Hilbert dimension, two-lowest iterative above.
DENSE_CUTOFF = 4096
ITERATIVE_CUTOFF = 2**20
DEGENERACY_TOL = 1e-12
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class LocalTerm:
    """Projector onto the complement of a window's blocked image."""

    left_site: int
    projector: np.ndarray
    support: tuple[int, ...]


@dataclass(frozen=True)
class GapReport:
    chain_length: int
    ground_energy: float
    gap: float
    ground_fidelity: float
    uniform_min_gap: float | None = None
    warning: str | None = None


def _window_term(mps: PepsState, start: int, size: int) -> LocalTerm:
    sites = [(i,) for i in range(start, start + size)]
    bt = block(mps, sites)
    virt = int(np.prod(bt.bond_dims, dtype=np.int64)) if bt.bond_dims else 1
    m = bt.tensor.reshape(bt.phys_dim, virt)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    rank = int(np.sum(s > INJECTIVITY_RTOL * s[0])) if s.size else 0
    if rank < virt:
        raise NotInjectiveError(
            f"window {start}..{start + size - 1} not injective after blocking "
            f"(rank {rank} < virtual dim {virt})",
            sigma_min=float(s[-1]) if s.size else 0.0,
        )
    basis = u[:, :rank]
    proj = np.eye(bt.phys_dim, dtype=np.complex128) - basis @ basis.conj().T
    proj = 0.5 * (proj + proj.conj().T)
    return LocalTerm(left_site=start, projector=proj, support=tuple(range(start, start + size)))


def parent_terms(mps: PepsState, block_size: int | None = None) -> list[LocalTerm]:
    """Local projector terms for a 1D chain.

    ``block_size=None`` tries windows of 2 sites and falls back to 3 if any
    2-window fails injectivity; an explicit size is strict.
    """
    if mps.lattice.dimension != 1:
        raise ArgumentError("parent Hamiltonians are built for 1D chains only")
    n = mps.lattice.n_sites
    sizes = [block_size] if block_size is not None else [2, 3]
    last_error = None
    for size in sizes:
        if n < size:
            raise ArgumentError(f"chain of {n} sites has no window of {size}")
        try:
            return [_window_term(mps, i, size) for i in range(n - size + 1)]
        except NotInjectiveError as exc:
            last_error = exc
    raise last_error


def _assemble_sparse(terms: list[LocalTerm], dims: list[int]) -> sp.csr_matrix:
    total = int(np.prod(dims, dtype=np.int64))
    h = sp.csr_matrix((total, total), dtype=np.complex128)
    for term in terms:
        lo, hi = term.support[0], term.support[-1]
        window = int(np.prod(dims[lo : hi + 1], dtype=np.int64))
        if term.projector.shape != (window, window):
            raise ArgumentError(
                f"term at {term.left_site} has dim {term.projector.shape[0]}, window needs {window}"
            )
        left = sp.identity(int(np.prod(dims[:lo], dtype=np.int64)), format="csr", dtype=np.complex128)
        right = sp.identity(int(np.prod(dims[hi + 1 :], dtype=np.int64)), format="csr", dtype=np.complex128)
        h = h + sp.kron(sp.kron(left, sp.csr_matrix(term.projector), format="csr"), right, format="csr")
    return h


def _two_lowest(h: sp.csr_matrix) -> tuple[np.ndarray, np.ndarray]:
    dim = h.shape[0]
    if dim <= DENSE_CUTOFF:
        vals, vecs = np.linalg.eigh(h.toarray())
        return vals[:2], vecs[:, :2]
    if h.nnz == 0:
        vecs = np.zeros((dim, 2), dtype=np.complex128)
        vecs[0, 0] = vecs[1, 1] = 1.0
        return np.zeros(2), vecs
    v0 = np.full(dim, 1.0 / np.sqrt(dim))
    try:
        vals, vecs = spla.eigsh(h, k=2, which="SA", v0=v0)
    except spla.ArpackNoConvergence as exc:
        raise NumericalError("iterative eigensolver did not converge") from exc
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    for i in range(2):
        residual = np.linalg.norm(h @ vecs[:, i] - vals[i] * vecs[:, i])
        if residual > RESIDUAL_TOL:
            raise NumericalError(f"eigenpair {i} residual {residual:.2e} above {RESIDUAL_TOL}")
    return vals, vecs


def assemble_and_gap(terms: list[LocalTerm], n_sites: int, mps: PepsState) -> GapReport:
    """Ground energy, spectral gap, and ground-state fidelity of sum of terms."""
    if n_sites != mps.lattice.n_sites:
        raise ArgumentError(f"chain length {n_sites} does not match the state ({mps.lattice.n_sites})")
    dims = [mps.tensors[(i,)].phys_dim for i in range(n_sites)]
    total = int(np.prod(dims, dtype=np.int64))
    if total > ITERATIVE_CUTOFF:
        raise SizeBudgetError(
            f"Hilbert dimension {total} above diagonalization cutoff {ITERATIVE_CUTOFF}",
            predicted_size=total,
        )
    h = _assemble_sparse(terms, dims)
    vals, vecs = _two_lowest(h)
    psi = build_state_vector(mps).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    if h.nnz == 0:
        fidelity = 1.0  # H = 0: every state is a ground state
    else:
        fidelity = float(abs(np.vdot(vecs[:, 0], psi)) ** 2)
    gap = float(vals[1] - vals[0])
    warning = "degenerate ground space" if gap < DEGENERACY_TOL else None
    return GapReport(
        chain_length=n_sites,
        ground_energy=float(vals[0]),
        gap=gap,
        ground_fidelity=min(1.0, fidelity),
        warning=warning,
    )


def _prefix_chain(mps: PepsState, t: int) -> PepsState:
    """Sites 0..t-1 with the dangling right leg merged into the last physical leg."""
    n = mps.lattice.n_sites
    lattice = LatticeSpec(dimension=1, extents=(t,))
    tensors = {}
    for i in range(t):
        a = mps.tensors[(i,)].tensor
        if i == t - 1 and t < n:
            # interior site (phys, left, right) -> end site (phys*right, left)
            a = a.transpose(0, 2, 1).reshape(a.shape[0] * a.shape[2], a.shape[1])
        tensors[(i,)] = SiteTensor(site=(i,), tensor=a)
    return PepsState(lattice=lattice, tensors=tensors, bond_dim=mps.bond_dim)


def uniform_gap_scan(mps: PepsState, max_n: int) -> GapReport:
    """Minimum spectral gap over the family of prefix parent Hamiltonians.

    Scans prefixes of 2..max_n sites; the reported chain fields describe the
    largest prefix and ``uniform_min_gap`` the minimum over the family. The
    scan is numerical evidence for a uniform gap, not a proof.
    """
    if mps.lattice.dimension != 1:
        raise ArgumentError("uniform gap scan applies to 1D chains only")
    if not 2 <= max_n <= mps.lattice.n_sites:
        raise ArgumentError(f"max_n must lie in 2..{mps.lattice.n_sites}, got {max_n}")
    min_gap = None
    warning = None
    report = None
    for t in range(2, max_n + 1):
        prefix = _prefix_chain(mps, t)
        terms = parent_terms(prefix)
        report = assemble_and_gap(terms, t, prefix)
        min_gap = report.gap if min_gap is None else min(min_gap, report.gap)
        if report.warning and warning is None:
            warning = f"prefix {t}: {report.warning}"
    return GapReport(
        chain_length=report.chain_length,
        ground_energy=report.ground_energy,
        gap=report.gap,
        ground_fidelity=report.ground_fidelity,
        uniform_min_gap=min_gap,
        warning=warning,
    )
