"""Command-line entry points for bound tables, comparisons, simulations,
and the query-recording verifier.

Subcommands
-----------
``bounds``
    Evaluate the search-success bounds over a ``(p, N, k)`` grid and flag
    every point where the exact form exceeds the factorial approximation.
``compare``
    Evaluate the classical-versus-quantum comparison report for a single
    parameter point and emit it as JSON plus an aligned text table.
``simulate``
    Run repeated protocol executions and evaluate the configured property
    checks (common prefix, chain quality, typicality) on each trial.
``verify-oracle``
    Replay the query-recording strategy suite and report identity gaps,
    theorem-bound checks, and claimed-constant violations.

Configuration
-------------
Command parameters come from a flat ``key = value`` config file passed via
``--config`` (``#`` starts a comment line; inline comments are not
supported).  Unknown keys are rejected.  The global keys ``seed``,
``trials``, ``jobs``, ``out``, ``format``, and ``figures`` may also be set
through ``PQPOW_<KEY>`` environment variables or command-line flags;
precedence is flag > environment > config file > built-in default.

Outputs
-------
Every command writes machine-readable output (CSV or JSON per ``format``)
into the ``out`` directory, and by default renders a PNG figure next to it
(``--no-figures`` or ``figures = false`` disables rendering).  Figures are
illustrative; only the delimited output is covered by the determinism
guarantee.

Exit codes
----------
=====  =======================================================
0      success; every configured gate passed
1      a property, bound-ordering, or constant violation found
2      configuration error (unknown key, bad value, bad params)
3      a resource limit was exceeded
=====  =======================================================
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass

from . import SCHEMA_VERSION
from .backbone import BackboneError, OracleParams, params_from_probability
from .bounds import (
    ComparisonParams,
    ParameterError,
    bernoulli_search_exact,
    bernoulli_search_stirling,
    comparison_table,
    pow_chain_bound,
)
from .execution import (
    AdversarySpec,
    ChecksConfig,
    ExecutionConfig,
    ExecutionError,
    honest_rate,
    per_party_rate,
    run_execution,
    run_trials,
    trace_events,
)
from .recording import ResourceLimitError
from .reporting import (
    aligned_table,
    format_value,
    sanitize,
    write_csv,
    write_json,
    write_text,
)
from .verify import run_suite, suite_strategies

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_RESOURCE = 3

#: Log-domain slack allowed before an exact-vs-factorial ordering
#: comparison counts as a violation.
ORDERING_TOL = 1e-9

_ENV_PREFIX = "PQPOW_"

_SUITE_STRATEGY_NAMES = ("classical-distinct", "grover-k1", "random-circuit")


class ConfigError(Exception):
    """A config file, environment variable, or flag value is unusable."""


@dataclass(frozen=True)
class _Opt:
    """One config key: how to parse it and what it defaults to."""

    kind: str
    default: object = None
    required: bool = False


_GLOBAL_OPTIONS: dict[str, _Opt] = {
    "seed": _Opt("int", 0),
    "trials": _Opt("int", 1),
    "jobs": _Opt("int", 1),
    "out": _Opt("str", "pqpow-out"),
    "format": _Opt("str", None),
    "figures": _Opt("bool", True),
}

_COMMAND_OPTIONS: dict[str, dict[str, _Opt]] = {
    "bounds": {
        "p_values": _Opt("list_float", required=True),
        "n_values": _Opt("list_int", required=True),
        "k_values": _Opt("list_int", required=True),
        "eps": _Opt("float", 0.1),
    },
    "compare": {
        "n": _Opt("int", required=True),
        "t": _Opt("int", required=True),
        "q": _Opt("int", required=True),
        "p": _Opt("float", required=True),
        "eps": _Opt("float", 0.1),
        "Q": _Opt("float", 1.0),
        "s": _Opt("int", 1000),
        "c_settle": _Opt("float", 1.0),
        "f_exact": _Opt("bool", False),
        "N": _Opt("int", None),
        "k_values": _Opt("list_int", ()),
    },
    "simulate": {
        "n": _Opt("int", required=True),
        "rounds": _Opt("int", required=True),
        "q": _Opt("int", required=True),
        "p": _Opt("float", None),
        "T": _Opt("int", None),
        "kappa": _Opt("int", 32),
        "eps": _Opt("float", 0.1),
        "adversary": _Opt("str", "none"),
        "t": _Opt("int", 1),
        "Q": _Opt("float", 0.0),
        "mode": _Opt("str", "poisson"),
        "rate_eps": _Opt("float", None),
        "release_threshold": _Opt("float_inf", math.inf),
        "window_s": _Opt("int", None),
        "check_common_prefix_k": _Opt("int", None),
        "check_chain_quality_l": _Opt("int", None),
        "check_chain_quality_mu": _Opt("float", None),
        "check_typical_s": _Opt("list_int", ()),
        "min_common_prefix_rate": _Opt("float", None),
        "min_chain_quality_rate": _Opt("float", None),
        "min_typical_rate": _Opt("float", None),
        "emit_trace": _Opt("bool", False),
    },
    "verify-oracle": {
        "p_values": _Opt("list_float", (0.1, 0.25, 0.5)),
        "include_m3": _Opt("bool", True),
        "strategies": _Opt("list_str", ()),
        "max_entries": _Opt("int", 1 << 24),
    },
}


def _parse_bool(key: str, raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in {"true", "1", "yes", "on"}:
        return True
    if lowered in {"false", "0", "no", "off"}:
        return False
    raise ConfigError(f"key '{key}': cannot parse {raw!r} as a boolean")


def _parse_value(key: str, raw: str, kind: str):
    """Parse one raw string according to the option kind."""
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError("must be finite")
            return value
        if kind == "float_inf":
            value = float(raw)
            if math.isnan(value):
                raise ValueError("must not be NaN")
            return value
        if kind == "bool":
            return _parse_bool(key, raw)
        if kind == "str":
            return raw
        if kind.startswith("list_"):
            elem_kind = kind[len("list_"):]
            parts = raw.replace(",", " ").split()
            return tuple(_parse_value(key, part, elem_kind) for part in parts)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(
            f"key '{key}': cannot parse {raw!r} as {kind} ({exc})"
        ) from None
    raise AssertionError(f"unknown option kind {kind!r}")


def load_config_file(path: str) -> dict[str, str]:
    """Read a flat ``key = value`` file into a raw-string mapping."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    entries: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, raw = stripped.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        if key in entries:
            raise ConfigError(f"{path}:{lineno}: duplicate key '{key}'")
        entries[key] = raw.strip()
    return entries


def resolve_options(command: str, args: argparse.Namespace) -> dict:
    """Merge flag, environment, config-file, and default values."""
    schema = dict(_GLOBAL_OPTIONS)
    schema.update(_COMMAND_OPTIONS[command])
    file_cfg = load_config_file(args.config) if args.config else {}
    unknown = sorted(set(file_cfg) - set(schema))
    if unknown:
        raise ConfigError(
            f"unknown config key(s) for '{command}': {', '.join(unknown)}"
        )

    flag_values = {
        "seed": args.seed,
        "trials": args.trials,
        "jobs": args.jobs,
        "out": args.out,
        "format": args.fmt,
        "figures": False if args.no_figures else None,
    }

    resolved: dict = {}
    for key, opt in schema.items():
        value = None
        found = False
        if key in flag_values and flag_values[key] is not None:
            value, found = flag_values[key], True
        if not found and key in _GLOBAL_OPTIONS:
            env_raw = os.environ.get(_ENV_PREFIX + key.upper())
            if env_raw is not None:
                value, found = _parse_value(key, env_raw, opt.kind), True
        if not found and key in file_cfg:
            value, found = _parse_value(key, file_cfg[key], opt.kind), True
        if not found:
            if opt.required:
                raise ConfigError(f"missing required key '{key}' for '{command}'")
            value = opt.default
        resolved[key] = value

    if resolved["format"] is None:
        resolved["format"] = "csv" if command == "bounds" else "json"
    if resolved["format"] not in {"csv", "json"}:
        raise ConfigError(f"format must be 'csv' or 'json', got {resolved['format']!r}")
    for key in ("trials", "jobs"):
        if resolved[key] < 1:
            raise ConfigError(f"{key} must be >= 1, got {resolved[key]}")
    if resolved["seed"] < 0 or resolved["seed"] >= 1 << 64:
        raise ConfigError("seed must fit in an unsigned 64-bit integer")
    return resolved


def _out_path(opts: dict, name: str) -> str:
    os.makedirs(opts["out"], exist_ok=True)
    return os.path.join(opts["out"], name)


def _maybe_figure(opts: dict, render, *render_args) -> None:
    """Render one figure unless figures are disabled."""
    if not opts["figures"]:
        return
    from . import figures

    path = getattr(figures, render)(*render_args)
    print(f"wrote {path}")


def _flatten(obj, prefix: str = "") -> list[tuple[str, object]]:
    """Depth-first (path, scalar) pairs of a sanitized document."""
    if isinstance(obj, dict):
        pairs: list[tuple[str, object]] = []
        for key in sorted(obj):
            path = f"{prefix}.{key}" if prefix else str(key)
            pairs.extend(_flatten(obj[key], path))
        return pairs
    if isinstance(obj, list):
        pairs = []
        for index, item in enumerate(obj):
            pairs.extend(_flatten(item, f"{prefix}[{index}]"))
        return pairs
    return [(prefix, obj)]


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

_BOUNDS_COLUMNS = (
    "schema",
    "p",
    "N",
    "k",
    "eps",
    "exact",
    "stirling",
    "chain_closed",
    "chain_exp",
    "exact_clamped",
    "stirling_clamped",
    "chain_closed_clamped",
    "chain_exp_clamped",
    "ordering_ok",
)


def cmd_bounds(opts: dict) -> int:
    p_values = sorted(set(opts["p_values"]))
    n_values = sorted(set(opts["n_values"]))
    k_values = sorted(set(opts["k_values"]))
    if not p_values or not n_values or not k_values:
        raise ConfigError("p_values, n_values, and k_values must be non-empty")
    for p in p_values:
        if not 0.0 < p < 1.0:
            raise ConfigError(f"p_values entries must lie in (0, 1), got {p}")
    if n_values[0] < 0:
        raise ConfigError("n_values entries must be >= 0")
    if k_values[0] < 1:
        raise ConfigError("k_values entries must be >= 1")

    eps = opts["eps"]
    rows: list[dict] = []
    fig_rows: list[dict] = []
    violations = 0
    for p in p_values:
        for n_queries in n_values:
            for k in k_values:
                exact = bernoulli_search_exact(n_queries, k, p)
                stirling = None
                if 4 <= k <= n_queries:
                    stirling = bernoulli_search_stirling(n_queries, k, p)
                chain = pow_chain_bound(n_queries, k, p)
                ordering_ok = True
                if stirling is not None:
                    ordering_ok = exact.log_raw <= stirling.log_raw + ORDERING_TOL
                if not ordering_ok:
                    violations += 1
                rows.append(
                    {
                        "schema": SCHEMA_VERSION,
                        "p": p,
                        "N": n_queries,
                        "k": k,
                        "eps": eps,
                        "exact": exact.clamped,
                        "stirling": None if stirling is None else stirling.clamped,
                        "chain_closed": chain.closed.clamped,
                        "chain_exp": chain.exponential.clamped,
                        "exact_clamped": exact.raw > 1.0,
                        "stirling_clamped": None
                        if stirling is None
                        else stirling.raw > 1.0,
                        "chain_closed_clamped": chain.closed.raw > 1.0,
                        "chain_exp_clamped": chain.exponential.raw > 1.0,
                        "ordering_ok": ordering_ok,
                    }
                )
                fig_rows.append(
                    {
                        "N": n_queries,
                        "k": k,
                        "p": p,
                        "log10_exact": exact.log_raw / math.log(10),
                    }
                )

    if opts["format"] == "csv":
        path = write_csv(_out_path(opts, "bounds.csv"), rows, _BOUNDS_COLUMNS)
    else:
        doc = {
            "command": "bounds",
            "parameters": {
                "p_values": p_values,
                "n_values": n_values,
                "k_values": k_values,
                "eps": eps,
            },
            "rows": rows,
        }
        path = write_json(_out_path(opts, "bounds.json"), doc)
    print(f"wrote {path} ({len(rows)} rows)")
    _maybe_figure(opts, "render_bounds_figure", fig_rows, _out_path(opts, "bounds.png"))
    if violations:
        print(f"bounds: {violations} ordering violation(s): exact > factorial form")
        return EXIT_VIOLATION
    print("bounds: ordering holds at every comparable grid point")
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------


def cmd_compare(opts: dict) -> int:
    kwargs = {
        "n": opts["n"],
        "t": opts["t"],
        "q": opts["q"],
        "p": opts["p"],
        "eps": opts["eps"],
        "Q": opts["Q"],
        "s": opts["s"],
        "c_settle": opts["c_settle"],
        "f_exact": opts["f_exact"],
    }
    if opts["N"] is not None:
        kwargs["N"] = opts["N"]
    if opts["k_values"]:
        kwargs["k_values"] = tuple(opts["k_values"])
    params = ComparisonParams(**kwargs)
    table = sanitize(comparison_table(params))

    doc = {"command": "compare", "table": table}
    json_path = write_json(_out_path(opts, "compare.json"), doc)
    print(f"wrote {json_path}")

    flat = _flatten(table)
    text = aligned_table(
        [(key, format_value(value)) for key, value in flat],
        ("quantity", "value"),
    )
    text_path = write_text(_out_path(opts, "compare.txt"), text)
    print(f"wrote {text_path}")

    if opts["format"] == "csv":
        csv_rows = [{"quantity": key, "value": value} for key, value in flat]
        csv_path = write_csv(
            _out_path(opts, "compare.csv"), csv_rows, ("quantity", "value")
        )
        print(f"wrote {csv_path}")

    _maybe_figure(opts, "render_compare_figure", table, _out_path(opts, "compare.png"))
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _simulate_columns(checks: ChecksConfig) -> list[str]:
    columns = [
        "trial",
        "rounds",
        "honest_pows",
        "honest_round_fraction",
        "adversarial_pows",
        "releases",
        "max_chain_length",
        "f_exact",
        "trace_hash",
    ]
    if checks.common_prefix_k is not None:
        columns.append("common_prefix_ok")
    if checks.chain_quality_l is not None:
        columns.extend(["chain_quality_ok", "chain_quality_worst_ratio"])
    for s in checks.typical_s:
        columns.extend(
            [f"typical_ok_s{s}", f"typical_violations_a_s{s}", f"typical_windows_s{s}"]
        )
    return columns


def cmd_simulate(opts: dict) -> int:
    if (opts["p"] is None) == (opts["T"] is None):
        raise ConfigError("exactly one of 'p' and 'T' must be set")
    if opts["p"] is not None:
        oracle = params_from_probability(
            opts["p"], kappa=opts["kappa"], q=opts["q"]
        )
    else:
        oracle = OracleParams(T=opts["T"], kappa=opts["kappa"], q=opts["q"])

    spec_kwargs = {
        "kind": opts["adversary"],
        "Q": opts["Q"],
        "mode": opts["mode"],
        "rate_eps": opts["rate_eps"] if opts["rate_eps"] is not None else opts["eps"],
        "release_threshold": opts["release_threshold"],
    }
    if opts["adversary"] == "classical":
        spec_kwargs["t"] = opts["t"]
    adversary = AdversarySpec(**spec_kwargs)

    if (
        opts["check_chain_quality_l"] is not None
        and opts["check_chain_quality_mu"] is None
    ):
        raise ConfigError(
            "check_chain_quality_mu is required when check_chain_quality_l is set"
        )
    checks = ChecksConfig(
        common_prefix_k=opts["check_common_prefix_k"],
        chain_quality_l=opts["check_chain_quality_l"],
        chain_quality_mu=opts["check_chain_quality_mu"],
        typical_s=tuple(opts["check_typical_s"]),
    )
    config = ExecutionConfig(
        n=opts["n"],
        oracle=oracle,
        rounds=opts["rounds"],
        eps=opts["eps"],
        adversary=adversary,
        seed=opts["seed"],
        trials=opts["trials"],
        window_s=opts["window_s"],
    )

    summaries = run_trials(config, checks, jobs=opts["jobs"])

    def _rate(key: str) -> float:
        return sum(1.0 for row in summaries if row[key]) / len(summaries)

    aggregate: dict = {
        "honest_round_fraction_mean": sum(
            row["honest_round_fraction"] for row in summaries
        )
        / len(summaries),
    }
    if checks.common_prefix_k is not None:
        aggregate["common_prefix_pass_rate"] = _rate("common_prefix_ok")
    if checks.chain_quality_l is not None:
        aggregate["chain_quality_pass_rate"] = _rate("chain_quality_ok")
    for s in checks.typical_s:
        aggregate[f"typical_pass_rate_s{s}"] = _rate(f"typical_ok_s{s}")

    parameters = {
        "n": opts["n"],
        "rounds": opts["rounds"],
        "q": opts["q"],
        "kappa": opts["kappa"],
        "T": oracle.T,
        "p_realized": oracle.p,
        "eps": opts["eps"],
        "seed": opts["seed"],
        "trials": opts["trials"],
        "adversary": sanitize(adversary),
        "window_s": opts["window_s"],
        "checks": sanitize(checks),
    }
    doc = {
        "command": "simulate",
        "parameters": parameters,
        "f_exact": honest_rate(opts["n"], oracle),
        "per_party_rate": per_party_rate(oracle),
        "trials": summaries,
        "aggregate": aggregate,
    }

    if opts["format"] == "csv":
        path = write_csv(
            _out_path(opts, "simulate.csv"), summaries, _simulate_columns(checks)
        )
    else:
        path = write_json(_out_path(opts, "simulate.json"), doc)
    print(f"wrote {path} ({len(summaries)} trials)")

    if opts["emit_trace"]:
        trace = run_execution(config, trial=0)
        lines = [
            json.dumps(sanitize(event), sort_keys=True, separators=(",", ":"))
            for event in trace_events(trace)
        ]
        trace_path = write_text(
            _out_path(opts, "trace.ndjson"), "\n".join(lines) + "\n"
        )
        print(f"wrote {trace_path} ({len(lines)} events)")

    _maybe_figure(
        opts, "render_simulate_figure", doc, _out_path(opts, "simulate.png")
    )

    failures: list[str] = []
    gates = (
        ("min_common_prefix_rate", "common_prefix_pass_rate"),
        ("min_chain_quality_rate", "chain_quality_pass_rate"),
    )
    for gate_key, agg_key in gates:
        minimum = opts[gate_key]
        if minimum is None:
            continue
        if agg_key not in aggregate:
            raise ConfigError(f"{gate_key} requires the matching check to be enabled")
        if aggregate[agg_key] < minimum:
            failures.append(f"{agg_key} {aggregate[agg_key]:.4f} < {minimum}")
    if opts["min_typical_rate"] is not None:
        keys = [f"typical_pass_rate_s{s}" for s in checks.typical_s]
        if not keys:
            raise ConfigError("min_typical_rate requires check_typical_s to be set")
        for key in keys:
            if aggregate[key] < opts["min_typical_rate"]:
                failures.append(
                    f"{key} {aggregate[key]:.4f} < {opts['min_typical_rate']}"
                )

    for failure in failures:
        print(f"gate failed: {failure}")
    if failures:
        return EXIT_VIOLATION
    print("simulate: all configured gates passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify-oracle
# ---------------------------------------------------------------------------

_VERIFY_CSV_COLUMNS = (
    "strategy",
    "m",
    "out_k",
    "n_queries",
    "p",
    "check",
    "k",
    "step",
    "value",
    "limit",
)


def cmd_verify_oracle(opts: dict) -> int:
    p_values = tuple(sorted(set(opts["p_values"])))
    if not p_values:
        raise ConfigError("p_values must be non-empty")
    for p in p_values:
        if not 0.0 < p < 1.0:
            raise ConfigError(f"p_values entries must lie in (0, 1), got {p}")

    grid = suite_strategies(
        p_values=p_values,
        max_entries=opts["max_entries"],
        include_m3=opts["include_m3"],
    )
    if opts["strategies"]:
        wanted = set(opts["strategies"])
        unknown = sorted(wanted - set(_SUITE_STRATEGY_NAMES))
        if unknown:
            raise ConfigError(
                f"unknown strategy name(s): {', '.join(unknown)}; "
                f"valid: {', '.join(_SUITE_STRATEGY_NAMES)}"
            )
        grid = [strategy for strategy in grid if strategy.name in wanted]
    if not grid:
        raise ConfigError("the configured strategy grid is empty")

    result = run_suite(grid)

    runs: list[dict] = []
    violating_states: dict[str, dict] = {}
    for check in result.checks:
        run = check.run
        runs.append(
            {
                "strategy": run.name,
                "m": run.m,
                "out_k": run.out_k,
                "n_queries": run.n_queries,
                "p": run.p,
                "success": run.success,
                "success_bound": check.success_bound,
                "success_gap": check.success_gap,
                "recurrence_slack": check.recurrence_slack,
                "primal_dual_gap": check.primal_dual_gap,
                "mixture_gap": check.mixture_gap,
                "unitarity_err": run.unitarity_err,
                "n_constant_violations": len(check.constant_violations),
            }
        )
        if check.constant_violations:
            label = (
                f"{run.name}/m{run.m}/k{run.out_k}/N{run.n_queries}/p{run.p}"
            )
            violating_states[label] = {"a": run.a, "beta": run.beta}

    violations = [
        dataclasses.asdict(violation)
        for check in result.checks
        for violation in check.constant_violations
    ]
    suite = {
        "n_runs": len(runs),
        "rotation_error": result.rotation_error,
        "slot_rotation_error": result.slot_rotation_err,
        "max_recurrence_slack": result.max_recurrence_slack,
        "max_unitarity_err": result.max_unitarity_err,
        "max_query_path_gap": result.max_query_path_gap,
        "max_primal_dual_gap": result.max_primal_dual_gap,
        "max_mixture_gap": result.max_mixture_gap,
        "theorem_failures": result.theorem_failures,
        "runs": runs,
        "constant_violations": violations,
        "violating_run_states": violating_states,
    }
    doc = {
        "command": "verify-oracle",
        "parameters": {
            "p_values": p_values,
            "include_m3": opts["include_m3"],
            "strategies": sorted(opts["strategies"]) or sorted(_SUITE_STRATEGY_NAMES),
            "max_entries": opts["max_entries"],
        },
        "suite": sanitize(suite),
    }

    path = write_json(_out_path(opts, "verify.json"), doc)
    print(f"wrote {path}")
    if opts["format"] == "csv":
        csv_path = write_csv(
            _out_path(opts, "verify.csv"), violations, _VERIFY_CSV_COLUMNS
        )
        print(f"wrote {csv_path}")

    _maybe_figure(
        opts, "render_verify_figure", doc["suite"], _out_path(opts, "verify.png")
    )

    print(
        f"verify-oracle: {len(runs)} runs, "
        f"{len(result.theorem_failures)} theorem failure(s), "
        f"{len(violations)} claimed-constant violation(s)"
    )
    if result.theorem_failures or violations:
        return EXIT_VIOLATION
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_HANDLERS = {
    "bounds": cmd_bounds,
    "compare": cmd_compare,
    "simulate": cmd_simulate,
    "verify-oracle": cmd_verify_oracle,
}

_COMMAND_HELP = {
    "bounds": "evaluate search-success bounds over a (p, N, k) grid",
    "compare": "evaluate the classical-vs-quantum comparison report",
    "simulate": "run repeated protocol executions with property checks",
    "verify-oracle": "replay the query-recording strategy suite",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pqpow",
        description="Bound tables, comparisons, protocol simulations, and "
        "query-recording verification.",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for name in _HANDLERS:
        sub = subparsers.add_parser(name, help=_COMMAND_HELP[name])
        sub.add_argument("--config", metavar="PATH", help="flat key=value file")
        sub.add_argument("--seed", type=int, help="base seed (64-bit unsigned)")
        sub.add_argument("--trials", type=int, help="number of independent trials")
        sub.add_argument("--jobs", type=int, help="worker processes for trials")
        sub.add_argument("--out", metavar="DIR", help="output directory")
        sub.add_argument(
            "--format", dest="fmt", choices=("csv", "json"), help="delimited format"
        )
        sub.add_argument(
            "--no-figures",
            action="store_true",
            help="skip rendering PNG figures",
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        opts = resolve_options(args.command, args)
        return _HANDLERS[args.command](opts)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ParameterError, ExecutionError, BackboneError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
