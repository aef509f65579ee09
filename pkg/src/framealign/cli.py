"""Command-line front end: asymmetries, rates, mutual information,
composition gaps, superadditivity search, POVM optimization, and sampling.

Exit codes: 0 success, 2 input error, 3 resource limit, 4 optimizer did not
converge (the flagged result is still written).  Errors print one
machine-readable JSON line to stderr.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import re
import sys
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from . import cyclic, povm, sampling, u1
from .core import (
    S_TIE_REL,
    FrameAlignError,
    GroupSpec,
    MalformedInput,
    ResourceLimit,
    StandardState,
    dft_profile,
    load_state,
    state_to_json,
    validate_state,
)
from .cyclic import INFINITE_RATE

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RESOURCE = 3
EXIT_NONCONVERGED = 4

_GROUP_RE = re.compile(r"^[zZ](\d+)$")


@dataclasses.dataclass
class RunConfig:
    """Fully resolved invocation, embedded in every JSON output."""

    subcommand: str
    group: dict | None = None
    probs: list[float] | None = None
    state_path: str | None = None
    state_path_b: str | None = None
    n_list: list[int] | None = None
    grid: int | None = None
    shots: int | None = None
    seed: int | None = None
    restarts: int | None = None
    trials: int | None = None
    outcomes: int | None = None
    max_iters: int | None = None
    step: float | None = None
    out: str | None = None
    format: str = "json"
    workers: int = 1
    tie_tolerance: float = S_TIE_REL


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # single-line machine-readable diagnostics
        print(json.dumps({"error": "UsageError", "message": message}), file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _parse_probs(text: str) -> list[Fraction]:
    parts = [tok.strip() for tok in text.split(",") if tok.strip()]
    if not parts:
        raise MalformedInput("empty probability list")
    try:
        fracs = [Fraction(tok) for tok in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedInput(f"cannot parse probabilities: {exc}") from exc
    return fracs


def _resolve_state(args, cfg: RunConfig) -> StandardState:
    """Exactly one input source: --probs (with --group) xor --state."""
    has_probs = getattr(args, "probs", None) is not None
    has_file = getattr(args, "state", None) is not None
    if has_probs == has_file:
        raise MalformedInput("provide exactly one of --probs or --state")
    if has_file:
        state = load_state(args.state)
        cfg.state_path = args.state
    else:
        if getattr(args, "group", None) is None:
            raise MalformedInput("--probs needs --group")
        fracs = _parse_probs(args.probs)
        total = sum(fracs)
        if abs(float(total) - 1.0) > 1e-6:
            raise MalformedInput(f"probabilities sum to {float(total)!r}, not 1")
        normalized = [f / total for f in fracs]
        group = _parse_group(args.group, len(normalized))
        state = validate_state([float(f) for f in normalized], group)
    cfg.group = state_to_json(state)["group"]
    cfg.probs = [float(x) for x in state.probs]
    return state


def _parse_group(text: str, n_probs: int) -> GroupSpec:
    if text.lower() == "u1":
        return GroupSpec.u1(n_probs)
    match = _GROUP_RE.match(text)
    if match:
        return GroupSpec.cyclic(int(match.group(1)))
    raise MalformedInput(f"unknown group {text!r}; expected u1 or zM")


def _parse_n_list(args) -> list[int]:
    if getattr(args, "n_list", None):
        try:
            values = [int(tok) for tok in args.n_list.split(",") if tok.strip()]
        except ValueError as exc:
            raise MalformedInput(f"bad --n-list: {exc}") from exc
        if not values or any(v < 1 for v in values):
            raise MalformedInput("--n-list needs positive integers")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise MalformedInput("--n-list must be strictly increasing")
        return values
    n = getattr(args, "n", None)
    if n is None:
        return [1]
    if n < 1:
        raise MalformedInput("--n must be >= 1")
    return [int(n)]


def _jsonify(value: Any) -> Any:
    """Make values JSON-safe: sentinels and infinities become the string "inf"."""
    if value is INFINITE_RATE:
        return "inf"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        if math.isnan(value):
            raise ValueError("refusing to serialize NaN")
        return value
    if isinstance(value, (np.floating, np.integer)):
        return _jsonify(value.item())
    if isinstance(value, np.ndarray):
        return [_jsonify(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {k: _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    return value


def _emit(payload: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _emit_json(obj: dict, cfg: RunConfig) -> None:
    obj = dict(obj)
    obj["config"] = _jsonify(dataclasses.asdict(cfg))
    payload = json.dumps(_jsonify(obj), indent=2, sort_keys=True) + "\n"
    _emit(payload, cfg.out)


def _csv_cell(value) -> str:
    if value is None or value is INFINITE_RATE:
        return ""
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return repr(float(value)) if isinstance(value, float) else str(value)


def _sweep_csv(rows: list[dict]) -> str:
    header = "N,H_bits,H_deficit,I_bits,I_deficit,lin_H_per_N,lin_I_per_N,target"
    lines = [header]
    for row in rows:
        lines.append(
            ",".join(
                _csv_cell(row[key])
                for key in (
                    "n",
                    "h_bits",
                    "h_deficit",
                    "i_bits",
                    "i_deficit",
                    "lin_h",
                    "lin_i",
                    "target",
                )
            )
        )
    return "\n".join(lines) + "\n"


def _series_rows(
    state: StandardState, n_list: list[int], grid: int | None, workers: int = 1
) -> list[dict]:
    if state.group.is_cyclic:
        points = cyclic.zm_rate_series(state, n_list)
        return [
            {
                "n": p.n_copies,
                "h_bits": p.asymmetry_bits,
                "h_deficit": p.asymmetry_deficit_bits,
                "i_bits": p.mi_bits,
                "i_deficit": p.mi_deficit_bits,
                "lin_h": p.lin_asym_per_copy,
                "lin_i": p.lin_mi_per_copy,
                "target": p.rate_target,
                "predicted_h_deficit": p.predicted_asym_deficit,
                "predicted_i_deficit": p.predicted_mi_deficit,
                "extrapolated": p.extrapolated,
            }
            for p in points
        ]
    quad = u1.QuadratureSpec(grid) if grid else None
    points = u1.u1_rate_series(state, n_list, quad, workers=workers)
    return [
        {
            "n": p.n_copies,
            "h_bits": p.asymmetry_bits,
            "h_deficit": None,
            "i_bits": p.mutual_info_bits,
            "i_deficit": None,
            "lin_h": p.lin_asymmetry_per_copy,
            "lin_i": p.lin_mi_per_copy,
            "target": p.variance_target,
        }
        for p in points
    ]


def _cmd_asymmetry(args, cfg: RunConfig) -> int:
    state = _resolve_state(args, cfg)
    n_list = _parse_n_list(args)
    cfg.n_list = n_list
    points = []
    for n in n_list:
        if state.group.is_cyclic:
            h, deficit = cyclic.zm_asymmetry(state, n)
            points.append({"n": n, "h_bits": h, "h_deficit": deficit})
        else:
            h = u1.u1_asymmetry(state, n)
            points.append({"n": n, "h_bits": h, "h_deficit": None})
    _emit_json({"points": points}, cfg)
    return EXIT_OK


def _cmd_mi(args, cfg: RunConfig) -> int:
    state = _resolve_state(args, cfg)
    n_list = _parse_n_list(args)
    cfg.n_list = n_list
    cfg.grid = args.grid
    points = []
    for n in n_list:
        if state.group.is_cyclic:
            mi, deficit = cyclic.covariant_mutual_info_zm(state, n)
            points.append({"n": n, "i_bits": mi, "i_deficit": deficit})
        else:
            quad = u1.QuadratureSpec(args.grid) if args.grid else None
            mi = u1.covariant_mutual_info_u1(state, n, quad)
            points.append({"n": n, "i_bits": mi, "i_deficit": None})
    _emit_json({"points": points}, cfg)
    return EXIT_OK


def _cmd_rate(args, cfg: RunConfig) -> int:
    state = _resolve_state(args, cfg)
    n_list = _parse_n_list(args)
    cfg.n_list = n_list
    cfg.grid = args.grid
    rows = _series_rows(state, n_list, args.grid, cfg.workers)
    if state.group.is_cyclic:
        profile = dft_profile(state)
        rate = cyclic.alignment_rate_zm(state)
        summary = {
            "rate_bits": rate,
            "r_max": profile.r_max,
            "maximizer_set": list(profile.S),
            "degeneracy_weight": profile.D,
        }
    else:
        summary = {
            "rate_bits": u1.regularized_asymmetry_u1(state),
            "number_variance": u1.number_variance(state),
        }
    if cfg.format == "csv":
        _emit(_sweep_csv(rows), cfg.out)
        return EXIT_OK
    _emit_json({**summary, "points": rows}, cfg)
    return EXIT_OK


def _cmd_superadd(args, cfg: RunConfig) -> int:
    state_a = load_state(args.a)
    state_b = load_state(args.b)
    cfg.state_path = args.a
    cfg.state_path_b = args.b
    result = cyclic.tensor_compose(state_a, state_b)
    prof_a = dft_profile(state_a)
    prof_b = dft_profile(state_b)
    rate_a, rate_b, rate_ab = result.rate_components
    _emit_json(
        {
            "a": state_to_json(state_a),
            "b": state_to_json(state_b),
            "gap_bits": result.gap_bits,
            "omega_moduli": result.omega_moduli,
            "r_max_a": prof_a.r_max,
            "r_max_b": prof_b.r_max,
            "rate_a_bits": rate_a,
            "rate_b_bits": rate_b,
            "rate_composed_bits": rate_ab,
            "composed": state_to_json(result.composed),
        },
        cfg,
    )
    return EXIT_OK


def _cmd_search(args, cfg: RunConfig) -> int:
    if args.group is None:
        raise MalformedInput("search needs --group zM")
    match = _GROUP_RE.match(args.group)
    if not match:
        raise MalformedInput("search runs on cyclic groups only (--group zM)")
    m = int(match.group(1))
    cfg.group = {"kind": "cyclic", "M": m}
    cfg.trials = args.trials
    cfg.seed = args.seed
    result = cyclic.search_superadditive(
        m, args.trials, args.seed, workers=args.workers
    )
    _emit_json(
        {
            "a": state_to_json(result.a),
            "b": state_to_json(result.b),
            "gap_bits": result.gap_bits,
        },
        cfg,
    )
    return EXIT_OK


def _cmd_optimize(args, cfg: RunConfig) -> int:
    state = _resolve_state(args, cfg)
    if not state.group.is_cyclic:
        raise MalformedInput("optimize runs on cyclic states only")
    n_list = _parse_n_list(args)
    if len(n_list) != 1:
        raise MalformedInput("optimize takes a single --n")
    n = n_list[0]
    cfg.n_list = n_list
    cfg.seed = args.seed
    cfg.restarts = args.restarts
    cfg.outcomes = args.outcomes
    cfg.max_iters = args.max_iters
    cfg.step = args.step
    ens = povm.ensemble_states(state, n)
    opt_cfg = povm.OptimizerConfig(
        outcomes=args.outcomes,
        restarts=args.restarts,
        max_iters=args.max_iters,
        step_size=args.step,
        seed=args.seed,
    )
    result = povm.optimize_povm(ens, opt_cfg)
    covariant_value = povm.mutual_info_of_povm(ens, povm.covariant_povm(state.group.M))
    _emit_json(
        {
            "mi_bits": result.mi_bits,
            "covariant_mi_bits": covariant_value,
            "converged": result.converged,
            "restart_index": result.restart_index,
            "iterations": len(result.trace),
            "povm": povm.povm_to_json(result.povm),
        },
        cfg,
    )
    return EXIT_OK if result.converged else EXIT_NONCONVERGED


def _cmd_sample(args, cfg: RunConfig) -> int:
    state = _resolve_state(args, cfg)
    if not state.group.is_cyclic:
        raise MalformedInput("sample runs on cyclic states only")
    n_list = _parse_n_list(args)
    if len(n_list) != 1:
        raise MalformedInput("sample takes a single --n")
    n = n_list[0]
    cfg.n_list = n_list
    cfg.shots = args.shots
    cfg.seed = args.seed
    measurement = povm.covariant_povm(state.group.M)
    record = sampling.simulate_protocol(
        state, n, measurement, args.shots, args.seed, workers=args.workers
    )
    estimate, corrected = sampling.plugin_mi(record)
    if cfg.format == "csv":
        _emit(sampling.counts_to_csv(record), cfg.out)
        return EXIT_OK
    _emit_json(
        {
            "counts": record.counts,
            "estimate_bits": estimate,
            "corrected_bits": corrected,
            "analytic_bits": cyclic.covariant_mutual_info_zm(state, n)[0],
        },
        cfg,
    )
    return EXIT_OK


def _add_state_args(sub) -> None:
    sub.add_argument("--group", help="u1 or zM (e.g. z4)")
    sub.add_argument("--probs", help="comma-separated probabilities; fractions allowed")
    sub.add_argument("--state", help="path to a state JSON file")


def _add_common(sub) -> None:
    sub.add_argument("--n", type=int, help="number of copies")
    sub.add_argument("--n-list", dest="n_list", help="strictly increasing list a,b,c")
    sub.add_argument("--out", help="output path (default: stdout)")
    sub.add_argument("--format", choices=("json", "csv"), default="json")
    sub.add_argument(
        "--workers", type=int, default=None,
        help="worker count (default: available parallelism)",
    )
    sub.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="framealign")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    for name, func in (
        ("asymmetry", _cmd_asymmetry),
        ("mi", _cmd_mi),
        ("rate", _cmd_rate),
    ):
        sub = subs.add_parser(name)
        _add_state_args(sub)
        _add_common(sub)
        sub.add_argument("--grid", type=int, help="quadrature grid size (power of two)")
        sub.set_defaults(func=func)

    sub = subs.add_parser("superadd")
    sub.add_argument("--a", required=True, help="state file for the first factor")
    sub.add_argument("--b", required=True, help="state file for the second factor")
    _add_common(sub)
    sub.set_defaults(func=_cmd_superadd)

    sub = subs.add_parser("search")
    sub.add_argument("--group", help="zM group to search")
    sub.add_argument("--trials", type=int, default=1000)
    _add_common(sub)
    sub.set_defaults(func=_cmd_search)

    sub = subs.add_parser("optimize")
    _add_state_args(sub)
    _add_common(sub)
    sub.add_argument("--restarts", type=int, default=5)
    sub.add_argument("--outcomes", type=int, default=None)
    sub.add_argument("--max-iters", dest="max_iters", type=int, default=500)
    sub.add_argument("--step", type=float, default=0.1)
    sub.set_defaults(func=_cmd_optimize)

    sub = subs.add_parser("sample")
    _add_state_args(sub)
    _add_common(sub)
    sub.add_argument("--shots", type=int, default=10000)
    sub.set_defaults(func=_cmd_sample)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = RunConfig(
        subcommand=args.subcommand,
        out=getattr(args, "out", None),
        format=getattr(args, "format", "json"),
        workers=getattr(args, "workers", None) or os.cpu_count() or 1,
        seed=getattr(args, "seed", None),
    )
    args.workers = cfg.workers
    try:
        return args.func(args, cfg)
    except ResourceLimit as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return EXIT_RESOURCE
    except FrameAlignError as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
