"""Seeded random unitaries, density matrices and locally maximally mixed states.

Every random quantity is drawn from a named sub-stream: a Philox generator keyed
by ``SeedSequence([seed, crc32(tag), index])``.  Results therefore do not depend on
the order in which sub-streams are consumed (serial vs. parallel execution).
"""

from __future__ import annotations

import zlib

import numpy as np

from .errors import NotAState, RejectionExhausted
from .states import BipartiteState, bipartite_compose, bipartite_decompose
from .su_algebra import generate_basis

RNG_SCHEME = "philox-seedseq-crc32/v1"
SEED_MASK = (1 << 64) - 1


def substream(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, tag, index)``."""
    key = [int(seed) & SEED_MASK, zlib.crc32(tag.encode("utf-8")), int(index)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def _ginibre(n: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary: QR of a Ginibre matrix with the phases of R's diagonal removed."""
    if d < 2:
        raise ValueError("d must be >= 2")
    Q, R = np.linalg.qr(_ginibre(d, rng))
    diag = np.diag(R)
    return Q * (diag / np.abs(diag))


def haar_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    """Projector on a Haar-random unit vector in C^d."""
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_density(n: int, rng: np.random.Generator) -> np.ndarray:
    """Hilbert-Schmidt ensemble: ``G G^dagger / tr(G G^dagger)`` with G Ginibre."""
    if n < 2:
        raise ValueError("n must be >= 2")
    G = _ginibre(n, rng)
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of O(n)."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def draw_lmm_state(d: int, rng: np.random.Generator, max_tries: int = 1000) -> tuple[BipartiteState, int]:
    """Like :func:`random_lmm_state` but also returns the number of draws used."""
    basis = generate_basis(d)
    zero = np.zeros(basis.size)
    for attempt in range(1, max_tries + 1):
        K = bipartite_decompose(random_density(d * d, rng), basis).K
        try:
            return bipartite_compose(zero, zero, K, basis), attempt
        except NotAState:
            continue
    raise RejectionExhausted(f"no positive locally maximally mixed state in {max_tries} draws (d = {d})")


def random_lmm_state(d: int, rng: np.random.Generator, max_tries: int = 1000) -> BipartiteState:
    """HS-random state with its local Bloch vectors zeroed, kept only if still positive."""
    return draw_lmm_state(d, rng, max_tries)[0]


def random_bloch_in_ball(d: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform point of the ``(d**2 - 1)``-ball of the given radius."""
    n = d * d - 1
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    return radius * rng.random() ** (1.0 / n) * v
