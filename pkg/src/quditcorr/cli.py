"""Command-line front end.

Exit codes: 0 success, 2 usage, 3 invalid state, 4 invalid optimizer config,
5 experiment violation, 6 optimizer lost to the oracle.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .discord import (
    FamilySpec,
    OptimizerConfig,
    analytic_d1,
    d1_discord,
    d2_discord,
    extract_family_parameter,
    isotropic_state,
    lower_bounds,
    make_family,
    oracle_d1,
    werner_state,
    xi,
)
from .errors import InvalidConfig, NotAState, TOutOfRange
from .experiments import ENSEMBLES, SamplerConfig, run_bound_experiment, run_containment_experiment
from .io import basis_to_json, dumps, load_state, result_to_json, state_to_json, write_json
from .sampling import haar_unitary, substream
from .states import (
    BipartiteState,
    correlation_ball_radius,
    density_to_bloch,
    is_locally_maximally_mixed,
    ppt_min_eigenvalue,
)
from .su_algebra import generate_basis, structure_constants

EXIT_USAGE = 2
EXIT_STATE = 3
EXIT_CONFIG = 4
EXIT_VIOLATION = 5
EXIT_ORACLE = 6
ORACLE_TOL = 1e-6


class UsageError(Exception):
    pass


def _level(text: str) -> int:
    d = int(text)
    if d < 2:
        raise argparse.ArgumentTypeError(f"d must be >= 2, got {d}")
    return d


def _emit(args, payload: dict, human: list[str] | None = None) -> None:
    if args.json or not human:
        sys.stdout.write(dumps(payload))
    else:
        print("\n".join(human))


def _fmt(value) -> str:
    return f"{value:.12g}" if isinstance(value, float) else str(value)


def _human(payload: dict, keys) -> list[str]:
    return [f"{k}: {_fmt(payload[k])}" for k in keys if k in payload]


def _bipartite(path) -> BipartiteState:
    state = load_state(path)
    if not isinstance(state, BipartiteState):
        raise NotAState("shape: a two-qudit state is required")
    return state


def _optimizer(args) -> OptimizerConfig:
    return OptimizerConfig(
        starts=args.starts,
        max_iterations=args.max_iter,
        objective_tolerance=args.tol,
        seed=args.seed,
        parallel=args.parallel,
    ).validate()


def _family_spec(kind: str, d: int, t: float, seed: int, identity: bool) -> FamilySpec:
    kind = kind.upper()
    count = 1 if kind == "A" else 2
    if identity:
        us = tuple(np.eye(d, dtype=complex) for _ in range(count))
    else:
        us = tuple(haar_unitary(d, substream(seed, "family-unitary", i)) for i in range(count))
    return FamilySpec(kind, d, t, us)


def cmd_basis(args) -> int:
    basis = generate_basis(args.d)
    tensors = structure_constants(basis)
    payload = basis_to_json(basis, tensors)
    if args.out:
        write_json(payload, args.out)
    human = [f"d = {basis.d}: {basis.size} generators"]
    for label, which in (("d", "sym"), ("f", "antisym")):
        # independent entries only: sorted index triples (f is antisymmetric, keep j<k<l)
        for j, k, l, v in tensors.nonzero(which):
            if (j <= k <= l) if which == "sym" else (j < k < l):
                human.append(f"{label}_{j + 1},{k + 1},{l + 1} = {v:.12g}")
    _emit(args, payload, human)
    return 0


def cmd_check(args) -> int:
    try:
        state = load_state(args.state)
    except NotAState as exc:
        _emit(args, {"valid": False, "error": str(exc)}, [f"invalid state: {exc}"])
        return EXIT_STATE
    if isinstance(state, BipartiteState):
        basis = generate_basis(state.d)
        kind, t = extract_family_parameter(state.K, structure_constants(basis), basis)
        payload = {
            "valid": True,
            "kind": "bipartite",
            "d": state.d,
            "x_norm": float(np.linalg.norm(state.x)),
            "y_norm": float(np.linalg.norm(state.y)),
            "K_frobenius": float(np.linalg.norm(state.K)),
            "ball_radius": correlation_ball_radius(state.d),
            "locally_maximally_mixed": is_locally_maximally_mixed(state),
            "min_eigenvalue": float(np.linalg.eigvalsh(state.matrix)[0]),
            "ppt_min_eigenvalue": ppt_min_eigenvalue(state.matrix),
            "family": kind,
            "family_t": t,
        }
    else:
        d = state.shape[0]
        n = density_to_bloch(state, generate_basis(d))
        payload = {
            "valid": True,
            "kind": "single",
            "d": d,
            "bloch_norm": float(np.linalg.norm(n)),
            "purity": float(np.trace(state @ state).real),
            "min_eigenvalue": float(np.linalg.eigvalsh(state)[0]),
        }
    _emit(args, payload, _human(payload, payload.keys()))
    return 0


def cmd_discord(args) -> int:
    cfg = _optimizer(args)
    analytic = None
    if args.state:
        state = _bipartite(args.state)
        source = {"state": str(args.state)}
    else:
        if args.d is None or args.t is None:
            raise UsageError("--family needs --d and --t")
        spec = _family_spec(args.family, args.d, args.t, args.seed, args.identity)
        state = make_family(spec)
        analytic = analytic_d1(spec)
        source = {"family": args.family, "d": args.d, "t": args.t, "identity": args.identity}
    if args.measure == "d1":
        result = d1_discord(state, cfg, raw=args.raw)
    else:
        result = d2_discord(state, cfg)
    b1, b2 = lower_bounds(state.K, state.d)
    payload = result_to_json(result)
    payload.update(
        d=state.d,
        xi=xi(state.K, state.d),
        bounds={"d1": b1, "d2": b2},
        spread=result.spread,
    )
    if analytic is not None:
        payload["analytic_d1"] = analytic
    payload["config"] = {**source, "measure": args.measure, "raw": args.raw, "optimizer": cfg.to_dict()}
    if args.out:
        write_json(payload, args.out)
    human = _human(payload, ("d", "measure", "value", "lower_bound", "analytic_d1", "xi", "spread", "objective_evals"))
    _emit(args, payload, human)
    return 0


def cmd_bounds(args) -> int:
    state = _bipartite(args.state)
    d = state.d
    b1, b2 = lower_bounds(state.K, d)
    rank = int(np.linalg.matrix_rank(state.K, tol=1e-10))
    knorm = float(np.linalg.norm(state.K))
    payload = {
        "d": d,
        "xi": xi(state.K, d),
        "d1_bound": b1,
        "d2_bound": b2,
        "K_frobenius": knorm,
        "rank_K": rank,
        "ball_radius": correlation_ball_radius(d),
        "ball_margin": correlation_ball_radius(d) - knorm,
        "locally_maximally_mixed": is_locally_maximally_mixed(state),
    }
    if rank < d:
        payload["note"] = "rank K < d: the bounds vanish"
    _emit(args, payload, _human(payload, payload.keys()))
    return 0


def _state_command(args, state: BipartiteState, extra: dict, repr: str = "matrix") -> int:
    basis = generate_basis(state.d)
    kind, t = extract_family_parameter(state.K, structure_constants(basis), basis)
    payload = state_to_json(state, repr)
    summary = {"family": kind, "family_t": t, **extra}
    if kind is not None:
        summary["analytic_d1"] = abs(t) if kind == "A" else 2.0 * abs(t) / state.d
    if args.out:
        write_json(payload, args.out)
    _emit(args, {**payload, "summary": summary}, _human(summary, summary.keys()))
    return 0


def cmd_family(args) -> int:
    spec = _family_spec(args.kind, args.d, args.t, args.seed, args.identity)
    state = make_family(spec)
    extra = {"kind": spec.kind, "d": args.d, "t": args.t, "seed": args.seed, "identity": args.identity}
    return _state_command(args, state, extra, repr=args.repr)


def cmd_werner(args) -> int:
    return _state_command(args, werner_state(args.d, args.a), {"d": args.d, "a": args.a})


def cmd_isotropic(args) -> int:
    return _state_command(args, isotropic_state(args.d, args.f), {"d": args.d, "f": args.f})


def cmd_sample(args) -> int:
    cfg = SamplerConfig(seed=args.seed, count=args.count, d=args.d, ensemble=args.ensemble, max_tries=args.max_tries)
    try:
        cfg.validate()
    except InvalidConfig as exc:
        raise UsageError(str(exc)) from exc
    if args.experiment == "containment":
        report = run_containment_experiment(cfg)
    else:
        if args.ensemble == "haar-unitary":
            raise UsageError("the bounds experiment needs a state ensemble; use --experiment containment")
        measures = tuple(m for m in args.measures.split(",") if m)
        if not set(measures) <= {"d1", "d2"} or not measures:
            raise UsageError(f"--measures must list d1 and/or d2, got {args.measures!r}")
        report = run_bound_experiment(cfg, _optimizer(args), measures)
    payload = report.to_dict()
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    if args.out:
        write_json(payload, args.out)
    human = _human(payload, ("experiment", "samples", "violations", "worst_margin"))
    _emit(args, payload, human)
    return EXIT_VIOLATION if report.violations else 0


def cmd_oracle_compare(args) -> int:
    state = _bipartite(args.state)
    cfg = _optimizer(args)
    opt_value = d1_discord(state, cfg).value
    oracle_value = oracle_d1(state, args.budget, args.seed)
    payload = {
        "d": state.d,
        "optimizer": opt_value,
        "oracle": oracle_value,
        "difference": oracle_value - opt_value,
        "optimizer_wins": opt_value <= oracle_value + ORACLE_TOL,
        "config": {"state": str(args.state), "budget": args.budget, "optimizer": cfg.to_dict()},
    }
    _emit(args, payload, _human(payload, ("d", "optimizer", "oracle", "difference", "optimizer_wins")))
    return 0 if payload["optimizer_wins"] else EXIT_ORACLE


def _add_optimizer_flags(p: argparse.ArgumentParser, starts: int = 32, max_iter: int = 2000) -> None:
    p.add_argument("--starts", type=int, default=starts, help="random restarts (default %(default)s)")
    p.add_argument("--max-iter", type=int, default=max_iter, help="simplex iterations per start")
    p.add_argument("--tol", type=float, default=1e-8, help="objective tolerance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--parallel", action="store_true", help="run restarts in worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quditcorr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"quditcorr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--json", action="store_true", help="machine-readable JSON on stdout")
        p.set_defaults(func=func)
        return p

    p = add("basis", cmd_basis, "export Gell-Mann generators and structure constants")
    p.add_argument("--d", type=_level, required=True)
    p.add_argument("--out")

    p = add("check", cmd_check, "validate a state file")
    p.add_argument("--state", required=True)

    p = add("discord", cmd_discord, "optimize D1 or D2 for a state file or an analytic family")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--state")
    src.add_argument("--family", choices=("a", "aa"))
    p.add_argument("--d", type=_level)
    p.add_argument("--t", type=float)
    p.add_argument("--identity", action="store_true", help="family with identity unitaries instead of random ones")
    p.add_argument("--measure", choices=("d1", "d2"), default="d1")
    p.add_argument("--raw", action="store_true", help="D1 without the d/(2(d-1)) prefactor")
    p.add_argument("--out")
    _add_optimizer_flags(p)

    p = add("bounds", cmd_bounds, "Xi lower bounds and correlation-ball margin")
    p.add_argument("--state", required=True)

    p = add("family", cmd_family, "write a family-A or family-AA state")
    p.add_argument("--kind", choices=("a", "aa"), required=True)
    p.add_argument("--d", type=_level, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--identity", action="store_true")
    p.add_argument("--repr", choices=("matrix", "bipartite-bloch"), default="bipartite-bloch")
    p.add_argument("--out")

    p = add("werner", cmd_werner, "write a Werner state (I + aF)/(d^2 + ad)")
    p.add_argument("--d", type=_level, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--out")

    p = add("isotropic", cmd_isotropic, "write an isotropic state with fidelity f")
    p.add_argument("--d", type=_level, required=True)
    p.add_argument("--f", type=float, required=True)
    p.add_argument("--out")

    p = add("sample", cmd_sample, "Monte Carlo bound / containment experiments")
    p.add_argument("--ensemble", choices=ENSEMBLES, required=True)
    p.add_argument("--d", type=_level, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--experiment", choices=("bounds", "containment"), default="bounds")
    p.add_argument("--measures", default="d1,d2")
    p.add_argument("--max-tries", type=int, default=1000)
    p.add_argument("--csv")
    p.add_argument("--out")
    _add_optimizer_flags(p, starts=4, max_iter=400)

    p = add("oracle-compare", cmd_oracle_compare, "optimizer vs. grid/random-search oracle")
    p.add_argument("--state", required=True)
    p.add_argument("--budget", type=int, default=10_000)
    _add_optimizer_flags(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, TOutOfRange) as exc:
        parser.error(str(exc))
    except NotAState as exc:
        print(f"invalid state: {exc}", file=sys.stderr)
        return EXIT_STATE
    except InvalidConfig as exc:
        print(f"invalid optimizer config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        parser.error(str(exc))
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
