"""JSON (de)serialization of bases, states, measurements and discord results.

Complex matrices are nested lists of ``[re, im]`` pairs.  Floats are written with
``repr`` precision, so every value round-trips exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .discord import DiscordResult
from .errors import NotAState
from .measurement import ProjectiveMeasurement, measurement_from_unitary
from .states import (
    BipartiteState,
    bipartite_compose,
    bipartite_decompose,
    bloch_to_density,
    density_to_bloch,
    validate_density,
)
from .su_algebra import GellMannBasis, StructureTensors, generate_basis

REPRS = ("matrix", "bloch", "bipartite-bloch")


def complex_to_json(a) -> list:
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def complex_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise ValueError("complex arrays must be nested lists of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _clean(obj):
    # strict JSON: non-finite floats become null, numpy scalars become Python numbers
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj))


def basis_to_json(basis: GellMannBasis, tensors: StructureTensors) -> dict:
    """Generators plus nonzero structure constants with 1-based ``(j, k, l)`` indices."""

    def entries(which):
        return [{"j": j + 1, "k": k + 1, "l": l + 1, "value": v} for j, k, l, v in tensors.nonzero(which)]

    return {
        "d": basis.d,
        "index_base": 1,
        "generators": complex_to_json(basis.generators),
        "d_tensor": entries("sym"),
        "f_tensor": entries("antisym"),
    }


def state_to_json(state, repr: str = "matrix") -> dict:
    """Serialize a :class:`BipartiteState` or a single-qudit density matrix."""
    if isinstance(state, BipartiteState):
        if repr == "bipartite-bloch":
            return {"d": state.d, "repr": repr, "x": state.x.tolist(), "y": state.y.tolist(), "K": state.K.tolist()}
        if repr == "matrix":
            return {"d": state.d, "repr": repr, "matrix": complex_to_json(state.matrix)}
        raise ValueError(f"cannot write a bipartite state as {repr!r}")
    rho = np.asarray(state, dtype=complex)
    d = rho.shape[0]
    if repr == "matrix":
        return {"d": d, "repr": repr, "matrix": complex_to_json(rho)}
    if repr == "bloch":
        return {"d": d, "repr": repr, "n": density_to_bloch(rho, generate_basis(d)).tolist()}
    raise ValueError(f"cannot write a single-qudit state as {repr!r}")


def _field(data: dict, name: str):
    if name not in data:
        raise NotAState(f"schema: missing field {name!r}")
    return data[name]


def _finite(arr: np.ndarray, name: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise NotAState(f"schema: field {name!r} contains non-finite numbers")
    return arr


def state_from_json(data: dict):
    """Parse and validate a state; returns a BipartiteState or a ``d x d`` density matrix.

    Raises :class:`NotAState` with a message naming the violated invariant.
    """
    if not isinstance(data, dict):
        raise NotAState("schema: state file must hold a JSON object")
    d = _field(data, "d")
    if not isinstance(d, int) or d < 2:
        raise NotAState(f"schema: d must be an integer >= 2, got {d!r}")
    kind = data.get("repr", "matrix")
    if kind not in REPRS:
        raise NotAState(f"schema: repr must be one of {REPRS}, got {kind!r}")
    basis = generate_basis(d)
    n = basis.size
    try:
        if kind == "matrix":
            rho = _finite(complex_from_json(_field(data, "matrix")), "matrix")
            if rho.shape == (d, d):
                return validate_density(rho)
            if rho.shape == (d * d, d * d):
                return bipartite_decompose(rho, basis)
            raise NotAState(f"shape: matrix is {rho.shape}, expected ({d}, {d}) or ({d * d}, {d * d})")
        if kind == "bloch":
            vec = _finite(np.asarray(_field(data, "n"), dtype=float), "n")
            if vec.shape != (n,):
                raise NotAState(f"shape: Bloch vector must have length {n}")
            return validate_density(bloch_to_density(vec, basis))
        x = _finite(np.asarray(_field(data, "x"), dtype=float), "x")
        y = _finite(np.asarray(_field(data, "y"), dtype=float), "y")
        K = _finite(np.asarray(_field(data, "K"), dtype=float), "K")
        if x.shape != (n,) or y.shape != (n,) or K.shape != (n, n):
            raise NotAState(f"shape: expected x, y of length {n} and K of shape ({n}, {n})")
        return bipartite_compose(x, y, K, basis)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, NotAState):
            raise
        raise NotAState(f"schema: {exc}") from exc


def load_state(path):
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise NotAState(f"file: cannot read state from {path}: {exc}") from exc
    return state_from_json(data)


def measurement_to_json(m: ProjectiveMeasurement) -> dict:
    return {"d": m.d, "unitary": complex_to_json(m.unitary)}


def measurement_from_json(data: dict) -> ProjectiveMeasurement:
    U = complex_from_json(data["unitary"])
    if U.shape != (data["d"], data["d"]):
        raise ValueError(f"unitary shape {U.shape} does not match d = {data['d']}")
    return measurement_from_unitary(U)


def _num(v: float):
    v = float(v)
    return v if math.isfinite(v) else None


def result_to_json(result: DiscordResult) -> dict:
    cfg = result.config
    return {
        "measure": result.measure,
        "raw": result.raw,
        "value": _num(result.value),
        "lower_bound": _num(result.lower_bound),
        "best_unitary": complex_to_json(result.best_unitary),
        "per_start": [_num(v) for v in result.per_start_values],
        "objective_evals": result.objective_evals,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
    }
