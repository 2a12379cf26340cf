"""Bloch-vector parametrization of single-qudit and bipartite states.

Single qudit::

    rho = (I + c <n, l>) / d,            c = sqrt(d(d-1)/2)

Two qudits::

    rho = (I x I + c <x, l> x I + c I x <y, l> + sum_jk K_jk l_j x l_k) / d**2

with ``K_jk = (d**2/4) tr(rho l_j x l_k)``.  Positivity is never inferred from the
Bloch data; it is always checked on the reconstructed matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotAState
from .su_algebra import GellMannBasis, StructureTensors, generate_basis, star

POSITIVITY_TOL = 1e-10
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10


def bloch_prefactor(d: int) -> float:
    return math.sqrt(d * (d - 1) / 2.0)


def local_dim(rho: np.ndarray) -> int:
    """Local dimension ``d`` of a ``d**2 x d**2`` bipartite matrix."""
    dim = np.shape(rho)[0]
    d = math.isqrt(dim)
    if d * d != dim or d < 2:
        raise NotAState(f"shape: {dim}x{dim} is not a two-qudit matrix")
    return d


def validate_density(rho: np.ndarray, tol: float = POSITIVITY_TOL) -> np.ndarray:
    """Return ``rho`` as a complex array or raise :class:`NotAState` naming the broken invariant."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise NotAState(f"shape: expected a square matrix, got {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITIAN_TOL:
        raise NotAState(f"hermiticity: |rho - rho^dagger| = {herm:.3e} > {HERMITIAN_TOL:.0e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise NotAState(f"trace: tr(rho) = {tr.real:.12g} differs from 1")
    min_eig = np.linalg.eigvalsh(rho)[0]
    if min_eig < -tol:
        raise NotAState(f"positivity: minimum eigenvalue {min_eig:.3e} < -{tol:.0e}")
    return rho


def is_density(rho: np.ndarray, tol: float = POSITIVITY_TOL) -> bool:
    try:
        validate_density(rho, tol)
    except NotAState:
        return False
    return True


def bloch_to_density(n, basis: GellMannBasis) -> np.ndarray:
    """Matrix with Bloch vector ``n``; Hermitian with unit trace but not necessarily positive."""
    n = np.asarray(n, dtype=float)
    if n.shape != (basis.size,):
        raise ValueError(f"Bloch vector must have length {basis.size}, got shape {n.shape}")
    d = basis.d
    return (np.eye(d) + bloch_prefactor(d) * basis.combine(n)) / d


def _bloch_coords(rho: np.ndarray, basis: GellMannBasis) -> np.ndarray:
    d = basis.d
    # tr(rho l_j) for every j
    traces = np.einsum("ab,jba->j", rho, basis.generators).real
    return d / (2.0 * bloch_prefactor(d)) * traces


def density_to_bloch(rho, basis: GellMannBasis) -> np.ndarray:
    rho = validate_density(rho)
    if rho.shape != (basis.d, basis.d):
        raise NotAState(f"shape: expected {basis.d}x{basis.d}, got {rho.shape}")
    return _bloch_coords(rho, basis)


def purity_check(n, tensors: StructureTensors, tol: float = 1e-10) -> bool:
    """Pure-state test: ``<n, n> = 1`` and, for ``d >= 3``, ``n * n = n``."""
    n = np.asarray(n, dtype=float)
    if abs(n @ n - 1.0) > tol:
        return False
    if tensors.d == 2:
        return True
    return bool(np.linalg.norm(star(n, n, tensors) - n) <= tol)


def radii(d: int) -> tuple[float, float]:
    """Out-sphere and in-sphere radii ``(R_d, r_d)``; ``R_d = (d-1) r_d``."""
    if d < 2:
        raise ValueError("d must be >= 2")
    return math.sqrt((d - 1) / (2.0 * d)), 1.0 / math.sqrt(2.0 * d * (d - 1))


def correlation_ball_radius(d: int) -> float:
    """Frobenius radius ``(d/2) sqrt(d**2 - 1)`` bounding every correlation matrix."""
    return 0.5 * d * math.sqrt(d * d - 1)


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """Two-qudit state kept together with its Bloch data ``(x, y, K)``."""

    d: int
    x: np.ndarray
    y: np.ndarray
    K: np.ndarray
    matrix: np.ndarray

    @property
    def basis(self) -> GellMannBasis:
        return generate_basis(self.d)


def _assemble(x, y, K, basis: GellMannBasis) -> np.ndarray:
    d = basis.d
    lam = basis.generators
    eye = np.eye(d)
    c = bloch_prefactor(d)
    corr = np.einsum("jk,jac,kbd->abcd", K, lam, lam).reshape(d * d, d * d)
    rho = np.eye(d * d) + c * np.kron(basis.combine(x), eye) + c * np.kron(eye, basis.combine(y)) + corr
    return rho / d**2


def bipartite_compose(x, y, K, basis: GellMannBasis, validate: bool = True) -> BipartiteState:
    n = basis.size
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    K = np.asarray(K, dtype=float)
    if x.shape != (n,) or y.shape != (n,) or K.shape != (n, n):
        raise ValueError(f"expected x, y of length {n} and K of shape ({n}, {n})")
    rho = _assemble(x, y, K, basis)
    if validate:
        min_eig = np.linalg.eigvalsh(rho)[0]
        if min_eig < -POSITIVITY_TOL:
            raise NotAState(
                f"positivity: (x, y, K) gives minimum eigenvalue {min_eig:.3e}; not a state"
            )
    return BipartiteState(basis.d, x, y, K, rho)


def bipartite_decompose(rho, basis: GellMannBasis | None = None) -> BipartiteState:
    """Bloch data ``(x, y, K)`` of a two-qudit density matrix."""
    rho = validate_density(rho)
    d = local_dim(rho)
    if basis is None:
        basis = generate_basis(d)
    elif basis.d != d:
        raise NotAState(f"shape: matrix is for d = {d}, basis has d = {basis.d}")
    lam = basis.generators
    x = _bloch_coords(partial_trace(rho, "B"), basis)
    y = _bloch_coords(partial_trace(rho, "A"), basis)
    rho4 = rho.reshape(d, d, d, d)
    K = (d * d / 4.0) * np.einsum("abcd,jca,kdb->jk", rho4, lam, lam).real
    return BipartiteState(d, x, y, K, rho)


def partial_trace(rho, traced: str = "B") -> np.ndarray:
    """Trace out subsystem ``traced`` ("A" or "B") of a ``d**2 x d**2`` matrix."""
    rho = np.asarray(rho)
    d = local_dim(rho)
    rho4 = rho.reshape(d, d, d, d)
    if traced == "B":
        return np.einsum("abcb->ac", rho4)
    if traced == "A":
        return np.einsum("abad->bd", rho4)
    raise ValueError(f"subsystem must be 'A' or 'B', got {traced!r}")


def is_locally_maximally_mixed(state: BipartiteState, tol: float = 1e-10) -> bool:
    return bool(np.linalg.norm(state.x) <= tol and np.linalg.norm(state.y) <= tol)


def partial_transpose(rho) -> np.ndarray:
    """Transpose on subsystem B."""
    rho = np.asarray(rho)
    d = local_dim(rho)
    return rho.reshape(d, d, d, d).transpose(0, 3, 2, 1).reshape(d * d, d * d)


def ppt_min_eigenvalue(rho) -> float:
    return float(np.linalg.eigvalsh(partial_transpose(rho))[0])


def apply_local_unitaries(rho, U, W) -> np.ndarray:
    """``(U x W) rho (U x W)^dagger``."""
    UW = np.kron(U, W)
    return UW @ np.asarray(rho) @ UW.conj().T


def product_state(rho_a, rho_b) -> np.ndarray:
    return np.kron(rho_a, rho_b)


def maximally_entangled(d: int) -> np.ndarray:
    """Projector on ``sum_k |kk> / sqrt(d)``."""
    psi = np.eye(d).reshape(d * d) / math.sqrt(d)
    return np.outer(psi, psi).astype(complex)
