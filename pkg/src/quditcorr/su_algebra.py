"""Generalized Gell-Mann generators of su(d), structure constants and adjoint action.

Generators are normalized as ``tr(l_j l_k) = 2 delta_jk`` and enumerated so that
the diagonal ones sit at (1-based) positions ``k**2 - 1`` for ``k = 2..d``.  Between
two consecutive diagonal generators come the symmetric/antisymmetric pairs coupling
the newly added level ``k`` to levels ``0..k-1``.  For ``d = 2`` this yields the
Pauli matrices, for ``d = 3`` the usual Gell-Mann ordering.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import NonUnitaryInput, StarUndefined

ALGEBRA_TOL = 1e-12
UNITARY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GellMannBasis:
    d: int
    generators: np.ndarray  # shape (d**2 - 1, d, d), complex

    @property
    def size(self) -> int:
        return self.d * self.d - 1

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, j: int) -> np.ndarray:
        return self.generators[j]

    def combine(self, coeffs: np.ndarray) -> np.ndarray:
        """Return ``sum_j coeffs[j] * l_j``."""
        return np.tensordot(np.asarray(coeffs), self.generators, axes=1)


@dataclass(frozen=True, eq=False)
class StructureTensors:
    """Dense symmetric (``sym[j,k,l] = d_jkl``) and antisymmetric (``antisym = f_jkl``) tensors.

    Indices are 0-based; ``d_146`` of the usual tables is ``sym[0, 3, 5]``.
    """

    d: int
    sym: np.ndarray
    antisym: np.ndarray

    @property
    def delta_mats(self) -> np.ndarray:
        """``delta_mats[k][j, l] = d_jkl``."""
        return np.moveaxis(self.sym, 1, 0)

    @property
    def f_mats(self) -> np.ndarray:
        """``f_mats[k][j, l] = f_jkl``."""
        return np.moveaxis(self.antisym, 1, 0)

    def nonzero(self, which: str = "sym", tol: float = ALGEBRA_TOL) -> list[tuple[int, int, int, float]]:
        """Sparse listing ``(j, k, l, value)`` of the entries with ``|value| > tol``."""
        tensor = {"sym": self.sym, "antisym": self.antisym}[which]
        idx = np.argwhere(np.abs(tensor) > tol)
        return [(int(j), int(k), int(l), float(tensor[j, k, l])) for j, k, l in idx]


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@functools.lru_cache(maxsize=None)
def generate_basis(d: int) -> GellMannBasis:
    """Generalized Gell-Mann matrices for ``su(d)``; cached, arrays are read-only."""
    if int(d) != d or d < 2:
        raise ValueError(f"level count must be an integer >= 2, got {d!r}")
    d = int(d)
    mats = []
    for k in range(1, d):
        for j in range(k):
            sym = np.zeros((d, d), dtype=complex)
            sym[j, k] = sym[k, j] = 1.0
            anti = np.zeros((d, d), dtype=complex)
            anti[j, k] = -1j
            anti[k, j] = 1j
            mats.extend((sym, anti))
        diag = np.zeros(d)
        diag[:k] = 1.0
        diag[k] = -k
        mats.append(np.diag(math.sqrt(2.0 / (k * (k + 1))) * diag).astype(complex))
    return GellMannBasis(d, _readonly(np.array(mats)))


def diagonal_indices(d: int) -> list[int]:
    """0-based positions of the diagonal (Cartan) generators."""
    return [k * k - 2 for k in range(2, d + 1)]


@functools.lru_cache(maxsize=None)
def _structure_constants(d: int) -> StructureTensors:
    lam = generate_basis(d).generators
    # triple[j,k,l] = tr(l_j l_k l_l); for Hermitian generators tr(l_k l_j l_l) = conj(triple)
    triple = np.einsum("jab,kbc,lca->jkl", lam, lam, lam, optimize=True)
    swapped = triple.transpose(1, 0, 2)
    sym = (triple + swapped) / 4.0
    anti = (triple - swapped) / 4j
    for name, t in (("d", sym), ("f", anti)):
        leak = np.max(np.abs(t.imag))
        if leak > ALGEBRA_TOL:
            raise ArithmeticError(f"{name}-tensor has imaginary residue {leak:.2e}")
    sym, anti = sym.real.copy(), anti.real.copy()
    sym[np.abs(sym) < ALGEBRA_TOL] = 0.0
    anti[np.abs(anti) < ALGEBRA_TOL] = 0.0
    return StructureTensors(d, _readonly(sym), _readonly(anti))


def structure_constants(basis: GellMannBasis) -> StructureTensors:
    """``d_jkl = tr({l_j, l_k} l_l) / 4`` and ``f_jkl = tr([l_j, l_k] l_l) / 4i``."""
    return _structure_constants(basis.d)


def closure_residual(basis: GellMannBasis, tensors: StructureTensors) -> float:
    """Max entrywise residual of ``l_j l_k - (2/d) delta_jk I - sum_l (d_jkl + i f_jkl) l_l``."""
    lam = basis.generators
    d, n = basis.d, basis.size
    prod = np.einsum("jab,kbc->jkac", lam, lam)
    coeff = tensors.sym + 1j * tensors.antisym
    rhs = np.einsum("jkl,lac->jkac", coeff, lam)
    rhs += (2.0 / d) * np.einsum("jk,ac->jkac", np.eye(n), np.eye(d))
    return float(np.max(np.abs(prod - rhs)))


def _bloch_prefactor(d: int) -> float:
    return math.sqrt(d * (d - 1) / 2.0)


def _product(tensor: np.ndarray, d: int, n_vec, m_vec) -> np.ndarray:
    if d == 2:
        raise StarUndefined("star/wedge products carry 1/(d-2) and are undefined for d = 2")
    n_vec = np.asarray(n_vec, dtype=float)
    m_vec = np.asarray(m_vec, dtype=float)
    size = d * d - 1
    if n_vec.shape != (size,) or m_vec.shape != (size,):
        raise ValueError(f"vectors must have length {size}")
    return _bloch_prefactor(d) / (d - 2) * np.einsum("jkl,k,l->j", tensor, n_vec, m_vec)


def star(n, m, tensors: StructureTensors) -> np.ndarray:
    """Symmetric product ``(n * m)_j = sqrt(d(d-1)/2)/(d-2) sum_kl d_jkl n_k m_l``."""
    return _product(tensors.sym, tensors.d, n, m)


def wedge(n, m, tensors: StructureTensors) -> np.ndarray:
    """Antisymmetric counterpart of :func:`star` built from ``f_jkl``."""
    return _product(tensors.antisym, tensors.d, n, m)


def check_unitary(U: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise NonUnitaryInput(f"expected a square matrix, got shape {U.shape}")
    resid = np.max(np.abs(U @ U.conj().T - np.eye(U.shape[0])))
    if resid > tol:
        raise NonUnitaryInput(f"U U^dagger deviates from identity by {resid:.2e} (tol {tol:.0e})")
    return U


def adjoint_rep(U: np.ndarray, basis: GellMannBasis) -> np.ndarray:
    """Orthogonal matrix ``R_jk = tr(l_j U l_k U^dagger) / 2`` of the adjoint action."""
    U = check_unitary(U)
    if U.shape[0] != basis.d:
        raise ValueError(f"unitary is {U.shape[0]}x{U.shape[0]}, basis has d = {basis.d}")
    lam = basis.generators
    rotated = U @ lam @ U.conj().T
    return 0.5 * np.einsum("jab,kba->jk", lam, rotated).real


def _pullback(V: np.ndarray, tensor: np.ndarray) -> np.ndarray:
    return np.einsum("abc,aj,bk,cl->jkl", tensor, V, V, V, optimize=True)


def _check_square(V: np.ndarray, size: int) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    if V.shape != (size, size):
        raise ValueError(f"expected a {size}x{size} matrix, got shape {V.shape}")
    return V


def preserves_d_tensor(V, tensors: StructureTensors, tol: float = 1e-10) -> bool:
    """Necessary condition for ``V`` to lie in the adjoint image of SU(d)."""
    V = _check_square(V, tensors.d**2 - 1)
    return bool(np.max(np.abs(_pullback(V, tensors.sym) - tensors.sym)) <= tol)


def preserves_f_tensor(V, tensors: StructureTensors, tol: float = 1e-10) -> bool:
    """True when ``V`` is an automorphism of the Lie bracket (``f_jkl`` invariant)."""
    V = _check_square(V, tensors.d**2 - 1)
    return bool(np.max(np.abs(_pullback(V, tensors.antisym) - tensors.antisym)) <= tol)


def dims_table(d: int) -> tuple[int, int, int]:
    """(dim SU(d), dim R(SU(d)), dim O(d^2 - 1))."""
    if d < 2:
        raise ValueError("d must be >= 2")
    n = d * d - 1
    return n, n, n * (n - 1) // 2
