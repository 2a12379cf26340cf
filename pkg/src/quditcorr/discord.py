"""Measurement-induced geometric discord of two-qudit states.

Trace-norm discord::

    D1(rho) = d / (2(d-1)) * min_U || rho - P_A^U(rho) ||_1

Hilbert-Schmidt discord (normalization ``d/(d-1)``)::

    D2(rho) = d / (d-1) * min_U || rho - P_A^U(rho) ||_F**2

The minimum runs over rank-one projective measurements ``P_k = U|k><k|U^dagger`` on
subsystem A, with ``U = exp(i sum_j theta_j l_j / 2)``.  It is searched by seeded
multi-start Nelder-Mead; every reported value is therefore an upper bound on the
true minimum.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidConfig, TOutOfRange
from .measurement import disturbance, measurement_from_unitary, trace_norm
from .sampling import haar_unitary, substream
from .states import BipartiteState, bipartite_compose, bipartite_decompose, maximally_entangled
from .su_algebra import (
    GellMannBasis,
    StructureTensors,
    adjoint_rep,
    check_unitary,
    generate_basis,
    preserves_d_tensor,
    preserves_f_tensor,
)

MEASURES = ("d1", "d2")
SIMPLEX_XATOL = 1e-4
POLISH_ROUNDS = 3
POLISH_FATOL_FACTOR = 1e-2


@dataclass(frozen=True)
class OptimizerConfig:
    starts: int = 32
    max_iterations: int = 2000
    objective_tolerance: float = 1e-8
    seed: int = 0
    parallel: bool = False

    def validate(self) -> "OptimizerConfig":
        if int(self.starts) != self.starts or self.starts < 1:
            raise InvalidConfig(f"starts must be a positive integer, got {self.starts!r}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise InvalidConfig(f"max_iterations must be a positive integer, got {self.max_iterations!r}")
        if not (self.objective_tolerance > 0 and math.isfinite(self.objective_tolerance)):
            raise InvalidConfig(f"objective_tolerance must be positive, got {self.objective_tolerance!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidConfig("seed must fit in an unsigned 64-bit integer")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class DiscordResult:
    value: float
    best_unitary: np.ndarray
    objective_evals: int
    per_start_values: list[float]
    lower_bound: float
    measure: str = "d1"
    raw: bool = False
    config: OptimizerConfig = field(default_factory=OptimizerConfig)

    @property
    def spread(self) -> float:
        """Gap between the worst and best start; large values flag a rugged landscape."""
        return max(self.per_start_values) - min(self.per_start_values)


def worker_count() -> int:
    env = os.environ.get("QUDITCORR_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def unitary_from_angles(theta, basis: GellMannBasis) -> np.ndarray:
    """``exp(i sum_j theta_j l_j / 2)`` via the eigendecomposition of the Hermitian exponent."""
    H = np.tensordot(np.asarray(theta, dtype=float), basis.generators, axes=1) / 2.0
    w, v = np.linalg.eigh(H)
    return (v * np.exp(1j * w)) @ v.conj().T


def _measure_scale(measure: str, d: int, raw: bool) -> float:
    if measure == "d1":
        return 1.0 if raw else d / (2.0 * (d - 1))
    if measure == "d2":
        return d / (d - 1.0)
    raise ValueError(f"measure must be one of {MEASURES}, got {measure!r}")


class _Objective:
    """Disturbance norm evaluated in the measurement frame.

    ``(U^dagger x I) rho (U x I)`` dephased in the computational basis of A keeps only
    the off-diagonal A-blocks; its spectrum equals that of ``rho - P_A(rho)``.
    """

    def __init__(self, rho: np.ndarray, d: int, measure: str, raw: bool = False):
        self.rho = rho
        self.d = d
        self.measure = measure
        self.scale = _measure_scale(measure, d, raw)
        self.half_gens = generate_basis(d).generators / 2.0
        self.eye = np.eye(d)
        blocks = ~np.eye(d, dtype=bool)
        self.mask = np.kron(blocks, np.ones((d, d), dtype=bool))

    def unitary(self, theta: np.ndarray) -> np.ndarray:
        w, v = np.linalg.eigh(np.tensordot(theta, self.half_gens, axes=1))
        return (v * np.exp(1j * w)) @ v.conj().T

    def at_unitary(self, U: np.ndarray) -> float:
        UI = np.kron(U, self.eye)
        r = UI.conj().T @ self.rho @ UI
        if self.measure == "d1":
            return self.scale * float(np.abs(np.linalg.eigvalsh(np.where(self.mask, r, 0.0))).sum())
        off = r[self.mask]
        return self.scale * float(np.vdot(off, off).real)

    def __call__(self, theta: np.ndarray) -> float:
        return self.at_unitary(self.unitary(theta))


def _nelder_mead(f, x0, cfg: OptimizerConfig, fatol: float | None = None):
    return minimize(
        f,
        x0,
        method="Nelder-Mead",
        options={
            "maxiter": cfg.max_iterations,
            "xatol": SIMPLEX_XATOL,
            "fatol": cfg.objective_tolerance if fatol is None else fatol,
            "adaptive": True,
        },
    )


def _run_start(args) -> tuple[float, np.ndarray, int]:
    rho, d, measure, raw, cfg, index = args
    f = _Objective(rho, d, measure, raw)
    rng = substream(cfg.seed, f"{measure}-start", index)
    x0 = rng.uniform(-np.pi, np.pi, d * d - 1)
    res = _nelder_mead(f, x0, cfg)
    return float(res.fun), np.asarray(res.x), int(res.nfev)


def _minimize(state: BipartiteState, cfg: OptimizerConfig, measure: str, raw: bool) -> DiscordResult:
    if not isinstance(cfg, OptimizerConfig):
        raise InvalidConfig("cfg must be an OptimizerConfig")
    cfg.validate()
    d = state.d
    jobs = [(state.matrix, d, measure, raw, cfg, i) for i in range(cfg.starts)]
    if cfg.parallel and cfg.starts > 1 and worker_count() > 1:
        with ProcessPoolExecutor(max_workers=min(worker_count(), cfg.starts)) as pool:
            runs = list(pool.map(_run_start, jobs))
    else:
        runs = [_run_start(job) for job in jobs]

    per_start = [r[0] for r in runs]
    best = int(np.argmin(per_start))
    best_value, best_theta = runs[best][0], runs[best][1]
    evals = sum(r[2] for r in runs)

    # restart the simplex around the winner: Nelder-Mead can stall on the kinks of |eig|,
    # and cone-shaped minima need a tighter stopping rule than the spread between starts
    f = _Objective(state.matrix, d, measure, raw)
    for _ in range(POLISH_ROUNDS):
        res = _nelder_mead(f, best_theta, cfg, cfg.objective_tolerance * POLISH_FATOL_FACTOR)
        evals += int(res.nfev)
        improved = res.fun < best_value - cfg.objective_tolerance
        if res.fun < best_value:
            best_value, best_theta = float(res.fun), np.asarray(res.x)
        if not improved:
            break
    # the polish continues the winning start, so it owns the refined value
    per_start[best] = best_value

    bound_d1, bound_d2 = lower_bounds(state.K, d)
    if measure == "d1":
        bound = bound_d1 * (2.0 * (d - 1) / d if raw else 1.0)
    else:
        bound = bound_d2
    return DiscordResult(
        value=best_value,
        best_unitary=f.unitary(best_theta),
        objective_evals=evals,
        per_start_values=per_start,
        lower_bound=bound,
        measure=measure,
        raw=raw,
        config=cfg,
    )


def d1_objective(state: BipartiteState, U, raw: bool = False) -> float:
    """Trace-norm disturbance of the measurement in the eigenbasis ``U``, with the D1 prefactor."""
    S = disturbance(state, measurement_from_unitary(U))
    return _measure_scale("d1", state.d, raw) * trace_norm(S)


def d2_objective(state: BipartiteState, U) -> float:
    S = disturbance(state, measurement_from_unitary(U))
    return _measure_scale("d2", state.d, False) * float(np.sum(np.abs(S) ** 2))


def d1_discord(state: BipartiteState, cfg: OptimizerConfig | None = None, raw: bool = False) -> DiscordResult:
    """Trace-norm discord. ``raw=True`` drops the ``d/(2(d-1))`` prefactor."""
    return _minimize(state, cfg or OptimizerConfig(), "d1", raw)


def d2_discord(state: BipartiteState, cfg: OptimizerConfig | None = None) -> DiscordResult:
    return _minimize(state, cfg or OptimizerConfig(), "d2", False)


def _check_corr(K, d: int) -> np.ndarray:
    K = np.asarray(K, dtype=float)
    n = d * d - 1
    if K.shape != (n, n):
        raise ValueError(f"correlation matrix must be {n}x{n} for d = {d}, got {K.shape}")
    return K


def xi(K, d: int) -> float:
    """Sum of the eigenvalues of ``K K^T`` after discarding the ``d - 1`` largest."""
    K = _check_corr(K, d)
    eta = np.sort(np.linalg.eigvalsh(K @ K.T))[::-1]
    return max(0.0, float(eta[d - 1 :].sum()))


def lower_bounds(K, d: int) -> tuple[float, float]:
    """``(sqrt(Xi) / (d(d-1)), 4 Xi / (d**3 (d-1)))`` for D1 and D2."""
    x = xi(K, d)
    return math.sqrt(x) / (d * (d - 1)), 4.0 * x / (d**3 * (d - 1))


def i0_matrix(basis: GellMannBasis) -> np.ndarray:
    """Diagonal matrix ``(I0)_kk = tr(l_k^T l_k) / 2``: +1 for symmetric, -1 for antisymmetric generators."""
    lam = basis.generators
    return np.diag(0.5 * np.einsum("kba,kba->k", lam, lam).real)


def family_t_range(kind: str, d: int) -> tuple[float, float]:
    if kind == "A":
        return -d / (2.0 * (d - 1)), d / (2.0 * (d + 1))
    if kind == "AA":
        return -d / (2.0 * (d * d - 1)), d / 2.0
    raise ValueError(f"family kind must be 'A' or 'AA', got {kind!r}")


@dataclass(frozen=True, eq=False)
class FamilySpec:
    """``K = t R(U)`` (kind A) or ``K = t R(U1) I0 R(U2)^T`` (kind AA)."""

    kind: str
    d: int
    t: float
    unitaries: tuple = ()

    def check_range(self, slack: float = 1e-12) -> None:
        lo, hi = family_t_range(self.kind, self.d)
        if not lo - slack <= self.t <= hi + slack:
            raise TOutOfRange(f"t = {self.t} outside [{lo:.6g}, {hi:.6g}] for family {self.kind}, d = {self.d}")

    def resolved_unitaries(self) -> tuple:
        count = 1 if self.kind == "A" else 2
        us = tuple(self.unitaries) or (np.eye(self.d, dtype=complex),) * count
        if len(us) != count:
            raise ValueError(f"family {self.kind} needs {count} unitaries, got {len(us)}")
        return tuple(check_unitary(u) for u in us)


def family_correlation(spec: FamilySpec, basis: GellMannBasis | None = None) -> np.ndarray:
    basis = basis or generate_basis(spec.d)
    us = spec.resolved_unitaries()
    if spec.kind == "A":
        return spec.t * adjoint_rep(us[0], basis)
    return spec.t * adjoint_rep(us[0], basis) @ i0_matrix(basis) @ adjoint_rep(us[1], basis).T


def make_family(spec: FamilySpec, basis: GellMannBasis | None = None) -> BipartiteState:
    """Locally maximally mixed state of family A or AA; positivity is re-verified."""
    spec.check_range()
    basis = basis or generate_basis(spec.d)
    zero = np.zeros(basis.size)
    return bipartite_compose(zero, zero, family_correlation(spec, basis), basis)


def analytic_d1(spec: FamilySpec) -> float:
    """Closed-form D1: ``|t|`` on family A, ``(2/d)|t|`` on family AA."""
    spec.check_range()
    return abs(spec.t) if spec.kind == "A" else 2.0 * abs(spec.t) / spec.d


def swap_operator(d: int) -> np.ndarray:
    F = np.zeros((d, d, d, d))
    for i in range(d):
        for j in range(d):
            F[i, j, j, i] = 1.0
    return F.reshape(d * d, d * d)


def werner_state(d: int, a: float) -> BipartiteState:
    """``(I + a F) / (d**2 + a d)`` with F the swap; ``a`` in [-1, 1]."""
    if not -1.0 <= a <= 1.0:
        raise ValueError(f"Werner parameter a must lie in [-1, 1], got {a}")
    rho = (np.eye(d * d) + a * swap_operator(d)) / (d * d + a * d)
    return bipartite_decompose(rho.astype(complex))


def werner_t(d: int, a: float) -> float:
    """Family-A parameter of :func:`werner_state`: ``K = t I`` with ``t = a d / (2 (d + a))``."""
    return a * d / (2.0 * (d + a))


def isotropic_state(d: int, f: float) -> BipartiteState:
    """``f Phi + (1-f)/(d**2-1) (I - Phi)`` with Phi the maximally entangled projector."""
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"isotropic fidelity must lie in [0, 1], got {f}")
    phi = maximally_entangled(d)
    rho = f * phi + (1.0 - f) / (d * d - 1) * (np.eye(d * d) - phi)
    return bipartite_decompose(rho)


def extract_family_parameter(
    K, tensors: StructureTensors, basis: GellMannBasis, tol: float = 1e-8
) -> tuple[str | None, float]:
    """Recover ``(kind, t)`` from a correlation matrix with scalar ``K K^T``.

    For ``d >= 3`` the sign of ``t`` is fixed by invariance of ``d_jkl`` and the kind by
    whether ``f_jkl`` is preserved (A) or flipped (AA).  For ``d = 2`` the d-tensor
    vanishes; positive determinant means A, ``K = -s I`` is read as Werner (A, -s),
    anything else with negative determinant as AA.
    """
    d = basis.d
    K = _check_corr(K, d)
    n = basis.size
    gram = K @ K.T
    s2 = float(np.trace(gram)) / n
    if np.max(np.abs(gram - s2 * np.eye(n))) > tol:
        return None, 0.0
    s = math.sqrt(max(s2, 0.0))
    if s < tol:
        return "A", 0.0
    V = K / s
    if d == 2:
        if np.linalg.det(V) > 0:
            return "A", s
        if np.max(np.abs(V + np.eye(n))) <= tol:
            return "A", -s
        return "AA", s
    I0 = i0_matrix(basis)
    ptol = max(1e-7, 10 * tol)
    for sign in (1.0, -1.0):
        W = sign * V
        if not preserves_d_tensor(W, tensors, ptol):
            continue
        if preserves_f_tensor(W, tensors, ptol):
            return "A", sign * s
        if preserves_f_tensor(W @ I0, tensors, ptol):
            return "AA", sign * s
    return None, 0.0


def _fibonacci_sphere(count: int) -> np.ndarray:
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    r = np.sqrt(1.0 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _batched_disturbance_norms(rho: np.ndarray, projectors: np.ndarray, measure: str) -> np.ndarray:
    """Norms of ``rho - sum_k (P_k x I) rho (P_k x I)`` for a batch ``projectors[b, k]``."""
    d = projectors.shape[-1]
    eye = np.eye(d)
    PI = np.einsum("bkac,ij->bkaicj", projectors, eye).reshape(*projectors.shape[:2], d * d, d * d)
    S = rho - np.einsum("bkxy,yz,bkzw->bxw", PI, rho, PI)
    if measure == "d2":
        return np.sum(np.abs(S) ** 2, axis=(1, 2))
    return np.abs(np.linalg.eigvalsh(S)).sum(axis=1)


def oracle_d1(
    state: BipartiteState, budget: int, seed: int = 0, raw: bool = False, measure: str = "d1", batch: int = 2000
) -> float:
    """Reference minimizer independent of the optimizer.

    ``d = 2``: a Fibonacci lattice of ``budget`` measurement directions.
    ``d >= 3``: ``budget`` Haar-random measurement bases.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    d = state.d
    scale = _measure_scale(measure, d, raw)
    rho = state.matrix
    best = math.inf
    if d == 2:
        dirs = _fibonacci_sphere(budget)
        pauli = generate_basis(2).generators
        for lo in range(0, budget, batch):
            nsig = np.tensordot(dirs[lo : lo + batch], pauli, axes=1)
            eye = np.eye(2)
            projs = np.stack([(eye + nsig) / 2.0, (eye - nsig) / 2.0], axis=1)
            best = min(best, float(_batched_disturbance_norms(rho, projs, measure).min()))
    else:
        rng = substream(seed, "oracle")
        for lo in range(0, budget, batch):
            us = np.array([haar_unitary(d, rng) for _ in range(min(batch, budget - lo))])
            projs = np.einsum("bak,bck->bkac", us, us.conj())
            best = min(best, float(_batched_disturbance_norms(rho, projs, measure).min()))
    return scale * best
