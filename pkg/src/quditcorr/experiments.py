"""Monte Carlo experiments: lower-bound validity and state-space containment."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .discord import (
    FamilySpec,
    OptimizerConfig,
    analytic_d1,
    d1_discord,
    d2_discord,
    family_t_range,
    lower_bounds,
    make_family,
    xi,
)
from .errors import InvalidConfig
from .sampling import (
    RNG_SCHEME,
    draw_lmm_state,
    haar_pure_state,
    haar_unitary,
    random_bloch_in_ball,
    random_density,
    substream,
)
from .states import (
    bipartite_decompose,
    bloch_to_density,
    correlation_ball_radius,
    density_to_bloch,
)
from .su_algebra import generate_basis

ENSEMBLES = ("haar-unitary", "hs-density", "lmm-rejection", "family-a", "family-aa")
STATE_ENSEMBLES = ENSEMBLES[1:]
BOUND_TOL = 1e-6
FAMILY_TOL = 1e-4
POSITIVITY_TOL = 1e-10
NORM_TOL = 1e-10
BALL_TOL = 1e-8
CSV_VERSION = "quditcorr-samples/v1"
BOUND_COLUMNS = (
    "index", "d", "ensemble", "xi", "t", "analytic_d1",
    "d1_bound", "d1_value", "d1_margin", "d2_bound", "d2_value", "d2_margin",
)
CONTAINMENT_COLUMNS = ("index", "d", "check", "quantity", "limit", "margin")


@dataclass(frozen=True)
class SamplerConfig:
    seed: int
    count: int
    d: int
    ensemble: str = "lmm-rejection"
    max_tries: int = 1000

    def validate(self) -> "SamplerConfig":
        if self.count < 1:
            raise InvalidConfig("count must be >= 1")
        if self.d < 2:
            raise InvalidConfig("d must be >= 2")
        if self.ensemble not in ENSEMBLES:
            raise InvalidConfig(f"ensemble must be one of {ENSEMBLES}, got {self.ensemble!r}")
        return self


@dataclass
class ExperimentReport:
    experiment: str
    samples: int
    violations: int
    worst_margin: float
    statistics: dict
    config: dict
    details: dict = field(default_factory=dict)
    rows: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("rows")
        return out

    def to_csv(self) -> str:
        columns = BOUND_COLUMNS if self.experiment == "bounds" else CONTAINMENT_COLUMNS
        buf = io.StringIO()
        buf.write(f"# {CSV_VERSION} experiment={self.experiment}\n")
        writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _csv_cell(row.get(k)) for k in columns})
        return buf.getvalue()


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def _stats(values) -> dict:
    values = [v for v in values if v is not None]
    if not values:
        return {}
    arr = np.asarray(values, dtype=float)
    return {"min": float(arr.min()), "mean": float(arr.mean()), "max": float(arr.max())}


def _sample_state(cfg: SamplerConfig, index: int):
    """Return ``(state, spec_or_None, draws)`` for sample ``index``."""
    rng = substream(cfg.seed, f"sample/{cfg.ensemble}/d{cfg.d}", index)
    d = cfg.d
    if cfg.ensemble == "hs-density":
        return bipartite_decompose(random_density(d * d, rng)), None, 1
    if cfg.ensemble == "lmm-rejection":
        state, draws = draw_lmm_state(d, rng, cfg.max_tries)
        return state, None, draws
    kind = "A" if cfg.ensemble == "family-a" else "AA"
    lo, hi = family_t_range(kind, d)
    t = float(rng.uniform(lo, hi))
    unitaries = tuple(haar_unitary(d, rng) for _ in range(1 if kind == "A" else 2))
    spec = FamilySpec(kind, d, t, unitaries)
    return make_family(spec), spec, 1


def run_bound_experiment(
    cfg: SamplerConfig, opt: OptimizerConfig, measures: tuple[str, ...] = ("d1", "d2")
) -> ExperimentReport:
    """Optimizer value vs. the Xi lower bounds for every sampled state.

    A violation is ``value < bound - 1e-6``; on the analytic families it is also
    ``|D1 - closed form| > 1e-4``.
    """
    cfg.validate()
    opt.validate()
    if cfg.ensemble not in STATE_ENSEMBLES:
        raise InvalidConfig(f"bound experiment needs a state ensemble {STATE_ENSEMBLES}, got {cfg.ensemble!r}")
    rows = []
    violations = {"d1": 0, "d2": 0, "analytic": 0}
    draws = 0
    for i in range(cfg.count):
        state, spec, used = _sample_state(cfg, i)
        draws += used
        b1, b2 = lower_bounds(state.K, cfg.d)
        row = {"index": i, "d": cfg.d, "ensemble": cfg.ensemble, "xi": xi(state.K, cfg.d)}
        if spec is not None:
            row["t"] = spec.t
            row["analytic_d1"] = analytic_d1(spec)
        if "d1" in measures:
            v = d1_discord(state, opt).value
            row.update(d1_bound=b1, d1_value=v, d1_margin=v - b1)
            if v < b1 - BOUND_TOL:
                violations["d1"] += 1
            if spec is not None and abs(v - row["analytic_d1"]) > FAMILY_TOL:
                violations["analytic"] += 1
        if "d2" in measures:
            v = d2_discord(state, opt).value
            row.update(d2_bound=b2, d2_value=v, d2_margin=v - b2)
            if v < b2 - BOUND_TOL:
                violations["d2"] += 1
        rows.append(row)

    margins = [r[k] for r in rows for k in ("d1_margin", "d2_margin") if k in r]
    statistics = {
        key: _stats(r.get(key) for r in rows)
        for key in ("xi", "d1_bound", "d1_value", "d1_margin", "d2_bound", "d2_value", "d2_margin")
    }
    details = {"violations_by_check": violations, "acceptance_rate": cfg.count / draws}
    if any(r.get("t") is not None for r in rows):
        gaps = [abs(r["d1_value"] - r["analytic_d1"]) for r in rows if "d1_value" in r]
        details["max_analytic_gap"] = max(gaps) if gaps else None
    return ExperimentReport(
        experiment="bounds",
        samples=cfg.count,
        violations=sum(violations.values()),
        worst_margin=min(margins) if margins else math.nan,
        statistics={k: v for k, v in statistics.items() if v},
        config={"sampler": asdict(cfg), "optimizer": opt.to_dict(), "measures": list(measures), "rng": RNG_SCHEME},
        details=details,
        rows=rows,
    )


def run_containment_experiment(cfg: SamplerConfig) -> ExperimentReport:
    """Three containment checks, ``cfg.count`` samples each.

    * insphere: ``|n| <= 1/(d-1)`` gives a positive matrix;
    * Bloch ball: random (mixed and pure) states have ``|n| <= 1``;
    * correlation ball: two-qudit states have ``|K|_F <= (d/2) sqrt(d**2 - 1)``.
    """
    cfg.validate()
    d = cfg.d
    basis = generate_basis(d)
    ball = correlation_ball_radius(d)
    rows = []
    for i in range(cfg.count):
        rng = substream(cfg.seed, f"containment/insphere/d{d}", i)
        n = random_bloch_in_ball(d, 1.0 / (d - 1), rng)
        min_eig = float(np.linalg.eigvalsh(bloch_to_density(n, basis))[0])
        rows.append({"index": i, "d": d, "check": "insphere", "quantity": min_eig, "limit": 0.0,
                     "margin": min_eig})

        rng = substream(cfg.seed, f"containment/bloch/d{d}", i)
        rho = haar_pure_state(d, rng) if i % 2 else random_density(d, rng)
        norm = float(np.linalg.norm(density_to_bloch(rho, basis)))
        rows.append({"index": i, "d": d, "check": "bloch-ball", "quantity": norm, "limit": 1.0,
                     "margin": 1.0 - norm})

        rng = substream(cfg.seed, f"containment/corr/d{d}", i)
        rho2 = haar_pure_state(d * d, rng) if i % 2 else random_density(d * d, rng)
        knorm = float(np.linalg.norm(bipartite_decompose(rho2, basis).K))
        rows.append({"index": i, "d": d, "check": "correlation-ball", "quantity": knorm, "limit": ball,
                     "margin": ball - knorm})

    tolerances = {"insphere": POSITIVITY_TOL, "bloch-ball": NORM_TOL, "correlation-ball": BALL_TOL}
    by_check = {}
    for check, tol in tolerances.items():
        margins = [r["margin"] for r in rows if r["check"] == check]
        by_check[check] = {
            "violations": sum(m < -tol for m in margins),
            "worst_margin": min(margins),
            "tolerance": tol,
        }
    return ExperimentReport(
        experiment="containment",
        samples=cfg.count,
        violations=sum(c["violations"] for c in by_check.values()),
        worst_margin=min(c["worst_margin"] for c in by_check.values()),
        statistics={c: _stats(r["quantity"] for r in rows if r["check"] == c) for c in tolerances},
        config={"sampler": asdict(cfg), "rng": RNG_SCHEME},
        details={"checks": by_check},
        rows=rows,
    )
