"""Local rank-one projective measurements on subsystem A and the disturbance they cause."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, NonOrthogonalInput
from .states import BipartiteState, bipartite_compose, bloch_prefactor, local_dim
from .su_algebra import GellMannBasis, StructureTensors, check_unitary, generate_basis

DISTURBANCE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ProjectiveMeasurement:
    d: int
    unitary: np.ndarray
    projectors: np.ndarray  # shape (d, d, d); projectors[k] = U |k><k| U^dagger

    def residuals(self) -> tuple[float, float]:
        """(completeness, orthogonality) residuals."""
        P = self.projectors
        complete = np.max(np.abs(P.sum(axis=0) - np.eye(self.d)))
        prods = np.einsum("jab,kbc->jkac", P, P)
        target = np.einsum("jk,kac->jkac", np.eye(self.d), P)
        return float(complete), float(np.max(np.abs(prods - target)))


@dataclass(frozen=True, eq=False)
class BlochProjector:
    """Action of the dephasing channel ``sigma -> sum_k P_k sigma P_k`` on Bloch coordinates."""

    d: int
    P: np.ndarray
    M: np.ndarray


def measurement_from_unitary(U) -> ProjectiveMeasurement:
    U = check_unitary(U)
    d = U.shape[0]
    projectors = np.einsum("ak,bk->kab", U, U.conj())
    return ProjectiveMeasurement(d, U, projectors)


def canonical_measurement(d: int) -> ProjectiveMeasurement:
    if d < 2:
        raise ValueError("d must be >= 2")
    return measurement_from_unitary(np.eye(d, dtype=complex))


def _as_matrix(state) -> np.ndarray:
    return state.matrix if isinstance(state, BipartiteState) else np.asarray(state, dtype=complex)


def apply_local_measurement(state, m: ProjectiveMeasurement) -> np.ndarray:
    """``sum_k (P_k x I) rho (P_k x I)``."""
    rho = _as_matrix(state)
    d = local_dim(rho)
    if d != m.d:
        raise ValueError(f"state has d = {d}, measurement has d = {m.d}")
    eye = np.eye(d)
    out = np.zeros_like(rho)
    for P in m.projectors:
        PI = np.kron(P, eye)
        out += PI @ rho @ PI
    return out


def bloch_projector(m: ProjectiveMeasurement, basis: GellMannBasis) -> BlochProjector:
    """``P_jk = (1/2) sum_m tr(l_j P_m l_k P_m)`` and ``M = I - P``."""
    lam = basis.generators
    # dephased[k] = sum_m P_m l_k P_m
    dephased = np.einsum("mab,kbc,mcd->kad", m.projectors, lam, m.projectors)
    P = 0.5 * np.einsum("jab,kba->jk", lam, dephased).real
    return BlochProjector(basis.d, P, np.eye(basis.size) - P)


def _disturbance_bloch(state: BipartiteState, M: np.ndarray, basis: GellMannBasis) -> np.ndarray:
    d = basis.d
    lam = basis.generators
    c = bloch_prefactor(d)
    MK = M @ state.K
    local = c * np.kron(basis.combine(M @ state.x), np.eye(d))
    corr = np.einsum("jk,jac,kbd->abcd", MK, lam, lam).reshape(d * d, d * d)
    return (local + corr) / d**2


def disturbance(state: BipartiteState, m: ProjectiveMeasurement, basis: GellMannBasis | None = None) -> np.ndarray:
    """``rho - P_A(rho)`` assembled from ``(M x, M K)``, cross-checked against the direct form."""
    if basis is None:
        basis = generate_basis(state.d)
    direct = state.matrix - apply_local_measurement(state, m)
    S = _disturbance_bloch(state, bloch_projector(m, basis).M, basis)
    resid = np.max(np.abs(S - direct))
    if resid > DISTURBANCE_TOL:
        raise ConsistencyError(f"Bloch-form disturbance differs from direct form by {resid:.3e}")
    return S


def q_matrix(S) -> np.ndarray:
    """``Q = S S^dagger``; positive semidefinite."""
    S = np.asarray(S)
    return S @ S.conj().T


def trace_norm(S) -> float:
    """Schatten 1-norm of a Hermitian matrix."""
    return float(np.abs(np.linalg.eigvalsh(S)).sum())


def q_expansion_family_a(
    t: float,
    V0,
    m: ProjectiveMeasurement,
    tensors: StructureTensors,
    basis: GellMannBasis,
    check_state: bool = True,
) -> np.ndarray:
    """Q(M) for the correlation matrix ``K = t V0`` (``x = y = 0``) from the X_k / Y_jk expansion.

    ``X_k = tr(M V0 D_k V0^T)``,
    ``Y_jk = tr(V0^T M D_j M V0 D_k + V0^T M F_j M V0 F_k)``.
    """
    d, n = basis.d, basis.size
    V0 = np.asarray(V0, dtype=float)
    if V0.shape != (n, n):
        raise NonOrthogonalInput(f"V0 must be {n}x{n}, got {V0.shape}")
    orth = np.max(np.abs(V0 @ V0.T - np.eye(n)))
    if orth > 1e-10:
        raise NonOrthogonalInput(f"V0 V0^T deviates from identity by {orth:.2e}")
    if check_state:
        # raises NotAState when t V0 lies outside the state set
        bipartite_compose(np.zeros(n), np.zeros(n), t * V0, basis)

    M = bloch_projector(m, basis).M
    Dm, Fm = tensors.delta_mats, tensors.f_mats
    X = np.einsum("ab,bc,kcd,ad->k", M, V0, Dm, V0)
    W = M @ V0
    # tr(W^T D_j W D_k) = sum W_aj' ... written out with einsum
    Y = np.einsum("ap,jab,bq,kqp->jk", W, Dm, W, Dm) + np.einsum("ap,jab,bq,kqp->jk", W, Fm, W, Fm)

    lam = basis.generators
    eye = np.eye(d)
    Q = (4.0 * (d - 1) / d) * np.eye(d * d, dtype=complex)
    Q += (2.0 / d) * np.kron(eye, basis.combine(X))
    Q += np.einsum("jk,jac,kbd->abcd", Y, lam, lam).reshape(d * d, d * d)
    return (t * t / d**4) * Q
