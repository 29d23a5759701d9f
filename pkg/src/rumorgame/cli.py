"""Command-line entry points and bit-stable experiment output.

Three workflows:

    rumorgame solve --matrix game.json [--out DIR]
    rumorgame disseminate [--config run.json] --out DIR [--seed N] [--events]
    rumorgame emerge      [--config run.json] --out DIR [--seed N]

Configs are flat JSON documents; every omitted key falls back to the
documented default, unknown keys are rejected, and out-of-range values
fail with the field name and constraint.  Tabular results are written as
RFC-4180-style CSV (header row, ``\\n`` line endings, ``.`` decimal
separator, 17-significant-digit floats) so identical config+seed runs
produce byte-identical files.  Files are written atomically (temp file
then rename).  ``--replications K`` runs K derived seeds (seed+0..K-1)
in worker threads, each into its own ``repNNN`` subdirectory.

The RUMORGAME_LOG environment variable sets log verbosity only; it never
affects results.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import os
import sys
from dataclasses import dataclass, field, replace

from . import emergence, engine, nash
from .core import EXPERT, TROLL, GlobalParams, PayoffMatrix, TraitVector

__all__ = ["RunConfig", "ConfigError", "parse_config", "serialize_config", "run", "main"]

log = logging.getLogger(__name__)

TRAIT_PRESETS = {"troll": TROLL, "expert": EXPERT}
_KINDS = ("solve", "disseminate", "emerge")


class ConfigError(ValueError):
    """Invalid configuration document (syntax or constraint violation)."""


@dataclass(frozen=True)
class RunConfig:
    """One experiment, fully specified and reproducible."""

    kind: str = "disseminate"
    params: GlobalParams = field(default_factory=GlobalParams)
    traits: TraitVector = TROLL
    traits_name: str | None = "troll"
    n_actors: int = 1000
    cohorts: tuple[tuple[float, float], ...] = engine.DEFAULT_COHORTS
    mode: str = "duplex"
    seed: int = 0
    total_games: int | None = None
    snapshot_interval: int | None = None
    n_bins: int = 50
    n_members: int = 10000
    connections: int = 25
    interactions_per_edge: int = 5
    iterations: int = 3
    prune_rule: str = "either"
    fit_range: tuple[int, int] = (5, 24)

    def resolved_total_games(self) -> int:
        # Default run length: 10,000 communications per actor.
        if self.total_games is not None:
            return self.total_games
        return 5000 * self.n_actors


_PARAM_KEYS = {
    "phi": "phi",
    "delta": "delta",
    "lambda": "lambda_",
    "n_assertions": "n_assertions",
    "gamma_r": "gamma_r",
    "gamma_p": "gamma_p",
    "cost_send": "cost_send",
    "cost_feedback": "cost_feedback",
}
_INT_KEYS = ("n_actors", "seed", "total_games", "snapshot_interval", "n_bins",
             "n_members", "connections", "interactions_per_edge", "iterations")
_KNOWN_KEYS = (
    {"kind", "traits", "cohorts", "mode", "prune_rule", "fit_range"}
    | set(_PARAM_KEYS)
    | set(_INT_KEYS)
)


def _require_int(key: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    return value


def parse_config(text: str, kind: str | None = None) -> RunConfig:
    """Parse and validate a JSON config document.

    ``kind`` (from the subcommand) fills in or cross-checks the config's
    own "kind" key.  Raises ConfigError with the offending position or
    field name.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"JSON syntax error at line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ConfigError(f"config must be a JSON object, got {type(doc).__name__}")
    unknown = sorted(set(doc) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")

    doc_kind = doc.get("kind", kind or "disseminate")
    if doc_kind not in _KINDS:
        raise ConfigError(f"kind: must be one of {_KINDS}, got {doc_kind!r}")
    if kind is not None and doc_kind != kind:
        raise ConfigError(f"kind: config says {doc_kind!r} but the subcommand is {kind!r}")

    param_kwargs = {}
    for key, attr in _PARAM_KEYS.items():
        if key in doc:
            v = doc[key]
            if key == "n_assertions":
                v = _require_int(key, v)
            elif isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{key}: expected a number, got {v!r}")
            param_kwargs[attr] = v
    try:
        params = GlobalParams(**param_kwargs)
    except ValueError as e:
        raise ConfigError(str(e)) from e

    traits_name: str | None = "troll"
    traits = TROLL
    if "traits" in doc:
        t = doc["traits"]
        if isinstance(t, str):
            if t not in TRAIT_PRESETS:
                raise ConfigError(
                    f"traits: unknown preset {t!r} (expected {sorted(TRAIT_PRESETS)})"
                )
            traits_name, traits = t, TRAIT_PRESETS[t]
        elif isinstance(t, dict):
            extra = sorted(set(t) - {"kappa", "rho", "pi"})
            if extra:
                raise ConfigError(f"traits: unknown key(s): {', '.join(extra)}")
            missing = sorted({"kappa", "rho", "pi"} - set(t))
            if missing:
                raise ConfigError(f"traits: missing key(s): {', '.join(missing)}")
            try:
                traits = TraitVector(kappa=t["kappa"], rho=t["rho"], pi=t["pi"])
            except (TypeError, ValueError) as e:
                raise ConfigError(f"traits: {e}") from e
            traits_name = None
        else:
            raise ConfigError(f"traits: expected a preset name or object, got {t!r}")

    cohorts = engine.DEFAULT_COHORTS
    if "cohorts" in doc:
        raw = doc["cohorts"]
        if not isinstance(raw, list) or not all(
            isinstance(c, list) and len(c) == 2 for c in raw
        ):
            raise ConfigError("cohorts: expected a list of [fraction, initial_k] pairs")
        cohorts = tuple((float(f), float(k)) for f, k in raw)

    ints = {}
    for key in _INT_KEYS:
        if key in doc:
            ints[key] = _require_int(key, doc[key])

    mode = doc.get("mode", "duplex")
    prune_rule = doc.get("prune_rule", "either")
    fit_range = (5, 24)
    if "fit_range" in doc:
        fr = doc["fit_range"]
        if not (isinstance(fr, list) and len(fr) == 2):
            raise ConfigError("fit_range: expected [d_min, d_max]")
        fit_range = (_require_int("fit_range[0]", fr[0]), _require_int("fit_range[1]", fr[1]))
        if fit_range[0] < 1 or fit_range[1] < fit_range[0]:
            raise ConfigError(f"fit_range: need 1 <= d_min <= d_max, got {fr}")

    config = RunConfig(
        kind=doc_kind,
        params=params,
        traits=traits,
        traits_name=traits_name,
        cohorts=cohorts,
        mode=mode,
        prune_rule=prune_rule,
        fit_range=fit_range,
        **ints,
    )
    _validate_config(config)
    return config


def _validate_config(config: RunConfig) -> None:
    if config.mode not in ("duplex", "one_way"):
        raise ConfigError(f"mode: must be 'duplex' or 'one_way', got {config.mode!r}")
    if config.prune_rule not in ("either", "both", "sum"):
        raise ConfigError(
            f"prune_rule: must be 'either', 'both' or 'sum', got {config.prune_rule!r}"
        )
    if config.n_actors < 2:
        raise ConfigError(f"n_actors: must be >= 2, got {config.n_actors}")
    if config.n_members < 2:
        raise ConfigError(f"n_members: must be >= 2, got {config.n_members}")
    if config.connections < 1 or config.connections >= config.n_members:
        raise ConfigError(
            f"connections: must satisfy 1 <= connections < n_members, got {config.connections}"
        )
    if config.total_games is not None and config.total_games < 0:
        raise ConfigError(f"total_games: must be >= 0, got {config.total_games}")
    if config.snapshot_interval is not None and config.snapshot_interval < 1:
        raise ConfigError(f"snapshot_interval: must be >= 1, got {config.snapshot_interval}")
    if config.n_bins < 1:
        raise ConfigError(f"n_bins: must be >= 1, got {config.n_bins}")
    if config.interactions_per_edge < 1:
        raise ConfigError(
            f"interactions_per_edge: must be >= 1, got {config.interactions_per_edge}"
        )
    if config.iterations < 1:
        raise ConfigError(f"iterations: must be >= 1, got {config.iterations}")
    try:
        total = sum(f for f, _ in config.cohorts)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"cohorts: fractions must sum to 1, got {total!r}")
        for f, k in config.cohorts:
            if not (0.0 <= f <= 1.0 and 0.0 <= k <= 1.0):
                raise ConfigError(f"cohorts: entry ({f!r}, {k!r}) out of [0, 1]")
    except TypeError as e:
        raise ConfigError(f"cohorts: {e}") from e


def serialize_config(config: RunConfig) -> str:
    """Canonical JSON for a RunConfig; parse_config round-trips it."""
    doc = {
        "kind": config.kind,
        "phi": config.params.phi,
        "delta": config.params.delta,
        "lambda": config.params.lambda_,
        "n_assertions": config.params.n_assertions,
        "gamma_r": config.params.gamma_r,
        "gamma_p": config.params.gamma_p,
        "cost_send": config.params.cost_send,
        "cost_feedback": config.params.cost_feedback,
        "traits": config.traits_name
        if config.traits_name is not None
        else {"kappa": config.traits.kappa, "rho": config.traits.rho, "pi": config.traits.pi},
        "n_actors": config.n_actors,
        "cohorts": [[f, k] for f, k in config.cohorts],
        "mode": config.mode,
        "seed": config.seed,
        "n_bins": config.n_bins,
        "n_members": config.n_members,
        "connections": config.connections,
        "interactions_per_edge": config.interactions_per_edge,
        "iterations": config.iterations,
        "prune_rule": config.prune_rule,
        "fit_range": list(config.fit_range),
    }
    if config.total_games is not None:
        doc["total_games"] = config.total_games
    if config.snapshot_interval is not None:
        doc["snapshot_interval"] = config.snapshot_interval
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_atomic(path: str, text: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def load_matrix(path: str) -> PayoffMatrix:
    """Read a bimatrix game from the JSON matrix format."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(
                f"JSON syntax error at line {e.lineno}, column {e.colno}: {e.msg}"
            ) from e
    for key in ("rows", "cols", "row_payoffs", "col_payoffs"):
        if key not in doc:
            raise ConfigError(f"matrix file missing key {key!r}")
    rows, cols = doc["rows"], doc["cols"]
    rp, cp = doc["row_payoffs"], doc["col_payoffs"]
    for name, grid in (("row_payoffs", rp), ("col_payoffs", cp)):
        if len(grid) != rows or any(len(r) != cols for r in grid):
            raise ConfigError(f"{name}: expected a {rows}x{cols} grid")
    entries = [[(float(rp[i][j]), float(cp[i][j])) for j in range(cols)] for i in range(rows)]
    return PayoffMatrix(tuple(range(rows)), tuple(range(cols)), entries)


def _run_solve(matrix_path: str, out_dir: str | None) -> int:
    matrix = load_matrix(matrix_path)
    profiles = nash.enumerate_equilibria(matrix)
    best = nash.select_equilibrium(profiles, matrix)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        doc = {
            "selected": _profile_doc(best),
            "equilibria": [_profile_doc(p) for p in profiles],
        }
        _write_atomic(os.path.join(out_dir, "solution.json"), json.dumps(doc, indent=2) + "\n")
    row = ", ".join(_fmt(p) for p in best.sigma_row)
    col = ", ".join(_fmt(p) for p in best.sigma_col)
    print(
        f"selected equilibrium: row=({row}) col=({col}) "
        f"payoffs=({_fmt(best.payoff_row)}, {_fmt(best.payoff_col)}) "
        f"({len(profiles)} equilibria found)"
    )
    return 0


def _profile_doc(p: nash.EquilibriumProfile) -> dict:
    return {
        "sigma_row": list(p.sigma_row),
        "sigma_col": list(p.sigma_col),
        "payoff_row": p.payoff_row,
        "payoff_col": p.payoff_col,
        "residual": p.residual,
    }


def _population_spec(config: RunConfig, seed: int) -> engine.PopulationSpec:
    return engine.PopulationSpec(
        n_actors=config.n_actors,
        traits=config.traits,
        cohorts=config.cohorts,
        mode=config.mode,
        params=config.params,
        seed=seed,
    )


def _run_disseminate(config: RunConfig, out_dir: str, seed: int, events: bool) -> int:
    spec = _population_spec(config, seed)
    series = engine.run_dissemination(
        spec,
        total_games=config.resolved_total_games(),
        snapshot_interval=config.snapshot_interval,
        n_bins=config.n_bins,
    )
    os.makedirs(out_dir, exist_ok=True)
    lines = ["time,bin_lo,bin_hi,count"]
    for snap in series:
        for b in range(len(snap.counts)):
            lines.append(
                f"{_fmt(snap.time)},{_fmt(snap.bin_edges[b])},"
                f"{_fmt(snap.bin_edges[b + 1])},{snap.counts[b]}"
            )
    _write_atomic(os.path.join(out_dir, "knowledge_hist.csv"), "\n".join(lines) + "\n")
    if events:
        ev = ["time,games,mean_k"]
        n = config.n_actors
        for snap in series:
            ev.append(f"{_fmt(snap.time)},{round(snap.time * n / 2)},{_fmt(snap.mean_k)}")
        _write_atomic(os.path.join(out_dir, "events.csv"), "\n".join(ev) + "\n")
    final = series[-1]
    print(f"final mean k = {_fmt(final.mean_k)} at time {_fmt(final.time)} (seed {seed})")
    return 0


def _run_emerge(config: RunConfig, out_dir: str, seed: int) -> int:
    graph = emergence.build_regular_graph(config.n_members, config.connections, seed)
    spec = engine.PopulationSpec(
        n_actors=config.n_members,
        traits=config.traits,
        cohorts=config.cohorts,
        mode="duplex",
        params=config.params,
        seed=seed,
    )
    results = emergence.run_emergence(
        graph,
        spec,
        interactions_per_edge=config.interactions_per_edge,
        prune_rule=config.prune_rule,
        iterations=config.iterations,
        seed=seed,
        fit_range=config.fit_range,
    )
    os.makedirs(out_dir, exist_ok=True)
    hist_lines = ["iteration,degree,count"]
    fit_lines = ["iteration,exponent,intercept,r_squared,d_min,d_max"]
    edge_lines = ["iteration,node_a,node_b,utility_a,utility_b"]
    for res in results:
        for degree, count in res.histogram.items():
            hist_lines.append(f"{res.iteration},{degree},{count}")
        if res.fit is not None:
            fit_lines.append(
                f"{res.iteration},{_fmt(res.fit.exponent)},{_fmt(res.fit.intercept)},"
                f"{_fmt(res.fit.r_squared)},{res.fit.d_min},{res.fit.d_max}"
            )
        for u, v in res.graph.edges():
            acc = res.graph.edge_utils[(u, v)]
            edge_lines.append(f"{res.iteration},{u},{v},{_fmt(acc[0])},{_fmt(acc[1])}")
    _write_atomic(os.path.join(out_dir, "degree_hist.csv"), "\n".join(hist_lines) + "\n")
    _write_atomic(os.path.join(out_dir, "fit.csv"), "\n".join(fit_lines) + "\n")
    _write_atomic(os.path.join(out_dir, "edges.csv"), "\n".join(edge_lines) + "\n")
    first_fit = results[0].fit
    if first_fit is None:
        print(f"iteration 1: no power-law fit possible (seed {seed})")
    else:
        print(f"iteration 1 fitted exponent = {_fmt(first_fit.exponent)} (seed {seed})")
    return 0


def run(
    config: RunConfig,
    out_dir: str | None = None,
    matrix_path: str | None = None,
    replications: int = 1,
    events: bool = False,
) -> int:
    """Execute one workflow; returns the process exit code."""
    if config.kind == "solve":
        if matrix_path is None:
            raise ConfigError("solve requires --matrix FILE")
        return _run_solve(matrix_path, out_dir)
    if out_dir is None:
        raise ConfigError(f"{config.kind} requires --out DIR")
    if replications < 1:
        raise ConfigError(f"replications: must be >= 1, got {replications}")

    def one(seed: int, target_dir: str) -> int:
        if config.kind == "disseminate":
            return _run_disseminate(config, target_dir, seed, events)
        return _run_emerge(config, target_dir, seed)

    if replications == 1:
        return one(config.seed, out_dir)
    with concurrent.futures.ThreadPoolExecutor(max_workers=min(replications, 8)) as pool:
        futures = [
            pool.submit(one, config.seed + rep, os.path.join(out_dir, f"rep{rep:03d}"))
            for rep in range(replications)
        ]
        codes = [f.result() for f in futures]
    return max(codes)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rumorgame",
        description="Information-dissemination games: solve, simulate, grow networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="find Nash equilibria of a bimatrix game")
    p_solve.add_argument("--matrix", required=True, help="JSON matrix file")
    p_solve.add_argument("--out", default=None, help="directory for solution.json")
    p_solve.add_argument("--seed", type=int, default=None, help="accepted for uniformity; unused")

    for name, help_text in (
        ("disseminate", "population-scale dissemination run"),
        ("emerge", "grow a network by pruning negative-utility friendships"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="JSON config file (defaults if omitted)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--replications", type=int, default=1, help="independent derived-seed runs")
        if name == "disseminate":
            p.add_argument("--events", action="store_true", help="also write events.csv")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("RUMORGAME_LOG", "WARNING").upper())
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            config = RunConfig(kind="solve")
            return run(config, out_dir=args.out, matrix_path=args.matrix)
        if args.config is not None:
            with open(args.config, "r", encoding="utf-8") as fh:
                text = fh.read()
        else:
            text = "{}"
        config = parse_config(text, kind=args.command)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        return run(
            config,
            out_dir=args.out,
            replications=args.replications,
            events=getattr(args, "events", False),
        )
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (OSError, nash.NumericalFailureError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
