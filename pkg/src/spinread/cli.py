"""Command-line interface: generation, training, intervals, experiments.

Subcommands::

    spinread presets                          list named scenarios
    spinread generate --scenario NAME ...     write a trace set + sidecar
    spinread train --traces F [...] ...       calibrate a model, optional CIs
    spinread ci --model F --traces F [...]    intervals for a trained model
    spinread fidelity --scenario NAME ...     run a fidelity (or calibration)
                                              experiment, write results

Configuration precedence: command-line flags > --config file > preset.
A config file is a JSON document with optional keys "scenario" (preset
name or inline scenario object), "seed", "output_dir", and "overrides"
(applied onto the scenario). A manifest written by ``fidelity`` is itself
a valid config, which makes every run reproducible from its manifest.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 input/output error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import SpinreadError
from .experiments import (
    ScenarioConfig,
    elzerman_training_init,
    psb_training_init,
    run_calibration_failure,
    run_sweep,
    scenario_catalog,
)
from .intervals import likelihood_ratio_intervals, monte_carlo_intervals
from .noise import sample_composed_traces, sample_hmm_traces
from .storage import (
    load_traceset,
    save_traceset,
    save_traceset_csv,
    write_json,
)
from .training import TrainingConfig, TrainingResult, train

logger = logging.getLogger("spinread")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_FREEZE_ALIASES = {"pi": "initial_probs", "mu": "means", "sigma2": "variances",
                   "A": "transitions", "initial_probs": "initial_probs",
                   "means": "means", "variances": "variances",
                   "transitions": "transitions"}


class ConfigError(Exception):
    pass


class _JsonLogFormatter(logging.Formatter):
    def format(self, record):
        payload = {"level": record.levelname.lower(), "logger": record.name,
                   "message": record.getMessage()}
        return json.dumps(payload, sort_keys=True)


def _setup_logging(log_json: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    if log_json:
        handler.setFormatter(_JsonLogFormatter())
    else:
        handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.INFO)


def _parallel_map(threads: int):
    if threads <= 1:
        return map

    def mapper(fn, items):
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))

    return mapper


# ----------------------------------------------------------------------
# configuration resolution

def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc


def _resolve_scenario(args, config: dict) -> ScenarioConfig:
    source = getattr(args, "scenario", None) or config.get("scenario")
    if source is None:
        raise ConfigError("no scenario given (use --scenario or a config file)")
    if isinstance(source, str):
        catalog = scenario_catalog()
        if source not in catalog:
            raise ConfigError(
                f"unknown preset {source!r}; available: {', '.join(sorted(catalog))}")
        base = catalog[source].to_dict()
    else:
        base = dict(source)
    overrides = dict(config.get("overrides", {}))
    for flag, field in (("methods", "methods"), ("filter_ts", "filter_block"),
                        ("n_test", "n_test"), ("length", "trace_length")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field] = value
    try:
        return ScenarioConfig.from_dict({**base, **overrides})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc


def _resolve_seed(args, config: dict) -> int:
    seed = args.seed if args.seed is not None else config.get("seed")
    if seed is None:
        raise ConfigError("an explicit --seed is required (no wall-clock default)")
    return int(seed)


def _resolve_out(args, config: dict) -> Path:
    out = args.out if args.out is not None else config.get("output_dir")
    if out is None:
        raise ConfigError("an output directory is required (--out)")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _parse_freeze(spec: str | None) -> frozenset:
    if not spec:
        return frozenset()
    fields = set()
    for token in spec.split(","):
        token = token.strip()
        if token not in _FREEZE_ALIASES:
            raise ConfigError(f"unknown freeze field {token!r}")
        fields.add(_FREEZE_ALIASES[token])
    return frozenset(fields)


def _training_config_for(model: str, freeze: frozenset,
                         ll_tolerance: float, max_iterations: int) -> TrainingConfig:
    if model == "psb":
        init = psb_training_init()
        frozen = freeze
    elif model == "elzerman":
        init = elzerman_training_init()
        frozen = freeze | {"initial_probs"}
    else:
        raise ConfigError(f"unknown state model {model!r}")
    return TrainingConfig(init_params=init, ll_tolerance=ll_tolerance,
                          max_iterations=max_iterations, frozen_fields=frozen)


# ----------------------------------------------------------------------
# subcommands

def cmd_presets(args) -> int:
    catalog = scenario_catalog()
    for name, sc in catalog.items():
        extras = []
        if sc.sweep_parameter:
            extras.append(f"sweep {sc.sweep_parameter} ({len(sc.sweep_values)} pts)")
        if sc.correlation_time:
            extras.append(f"Tc={sc.correlation_time:g}")
        if sc.filter_block:
            extras.append(f"filter ts={sc.filter_block}")
        detail = (f"{sc.state_model} kind={sc.kind} N={sc.n_test} "
                  f"T={sc.trace_length} snr={sc.snr:g}")
        if extras:
            detail += " " + " ".join(extras)
        print(f"{name:24s} {detail}")
    return EXIT_OK


def cmd_generate(args) -> int:
    config = _load_config_file(args.config)
    scenario = _resolve_scenario(args, config)
    seed = _resolve_seed(args, config)
    out = _resolve_out(args, config)

    truth = scenario.truth_model()
    noise = scenario.noise_spec()
    classes = scenario.initial_classes
    n = scenario.n_test
    initial = np.r_[np.full(n // 2, classes[0], dtype=np.int64),
                    np.full(n - n // 2, classes[1], dtype=np.int64)]
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if noise.is_white:
        traces = sample_hmm_traces(truth, initial, scenario.trace_length, rng)
    else:
        traces = sample_composed_traces(truth, noise, initial,
                                        scenario.trace_length, rng)
    traces.metadata = {
        "scenario": scenario.to_dict(),
        "noise": noise.to_dict(),
        "params": truth.to_dict(),
        "seed": seed,
    }
    save_traceset(traces, out / "traces.npz",
                  created_at=args.stamp if args.stamp else None)
    if args.csv:
        save_traceset_csv(traces, out / "traces.csv")
    logger.info("generated %d traces of length %d (noise %s)",
                traces.n_traces, traces.length, noise.kind)
    print(f"wrote {traces.n_traces} traces of length {traces.length} to {out}")
    return EXIT_OK


def _write_training_outputs(out: Path, result: TrainingResult) -> None:
    write_json(result.to_dict(), out / "lambda_star.json")
    with open(out / "ll_history.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "total_ll"])
        for k, ll in enumerate(result.ll_history):
            writer.writerow([k, repr(float(ll))])


def cmd_train(args) -> int:
    config = _load_config_file(args.config)
    out = _resolve_out(args, config)
    trace_sets = [load_traceset(p) for p in args.traces]
    model = args.state_model
    if model is None:
        meta = trace_sets[0].metadata
        m = len(meta.get("params", {}).get("means", [])) if meta else 0
        model = {2: "psb", 3: "elzerman"}.get(m)
        if model is None:
            raise ConfigError("cannot infer the state model; pass --state-model")
    cfg = _training_config_for(model, _parse_freeze(args.freeze),
                               args.ll_tolerance, args.max_iterations)
    result = train(cfg, trace_sets[0])
    _write_training_outputs(out, result)
    logger.info("trained on %d traces: %d iterations, converged=%s",
                trace_sets[0].n_traces, result.iterations, result.converged)

    if args.ci:
        intervals = _compute_intervals(args.ci, args.sets, cfg, result,
                                       trace_sets, args.threads)
        write_json({"method": args.ci, "level": 0.68,
                    "intervals": [ci.to_dict() for ci in intervals.values()]},
                   out / "intervals.json")
    print(f"final total log-likelihood {result.ll_history[-1]:.6f} "
          f"after {result.iterations} iterations")
    return EXIT_OK


def _compute_intervals(method: str, sets: int | None, cfg: TrainingConfig,
                       result: TrainingResult, trace_sets, threads: int):
    if method == "likelihood-ratio":
        return likelihood_ratio_intervals(result.params, trace_sets[0], config=cfg)
    if method == "monte-carlo":
        wanted = sets or len(trace_sets)
        if len(trace_sets) < 2 or len(trace_sets) != wanted:
            raise ConfigError(
                f"monte-carlo intervals need --sets={wanted or 2} trace files, "
                f"got {len(trace_sets)}")
        return monte_carlo_intervals(cfg, trace_sets,
                                     map_fn=_parallel_map(threads))
    raise ConfigError(f"unknown interval method {method!r}")


def cmd_ci(args) -> int:
    config = _load_config_file(args.config)
    out = _resolve_out(args, config)
    trace_sets = [load_traceset(p) for p in args.traces]
    payload = json.loads(Path(args.model).read_text())
    result = TrainingResult.from_dict(payload)
    model = args.state_model or {2: "psb", 3: "elzerman"}.get(
        result.params.num_states)
    cfg = _training_config_for(model, _parse_freeze(args.freeze),
                               args.ll_tolerance, args.max_iterations)
    intervals = _compute_intervals(args.ci, args.sets, cfg, result,
                                   trace_sets, args.threads)
    write_json({"method": args.ci, "level": 0.68,
                "intervals": [ci.to_dict() for ci in intervals.values()]},
               out / "intervals.json")
    print(f"wrote {len(intervals)} intervals to {out / 'intervals.json'}")
    return EXIT_OK


def cmd_fidelity(args) -> int:
    config = _load_config_file(args.config)
    scenario = _resolve_scenario(args, config)
    seed = _resolve_seed(args, config)
    out = _resolve_out(args, config)
    manifest = {"scenario": scenario.to_dict(), "seed": seed,
                "version": __version__}

    if scenario.kind == "calibration":
        outcome = run_calibration_failure(scenario, seed)
        write_json(outcome, out / "results.json")
        write_json(manifest, out / "manifest.json")
        print(f"wrote calibration study ({len(outcome['points'])} points) to {out}")
        return EXIT_OK

    rows, reports = run_sweep(scenario, seed, map_fn=_parallel_map(args.threads))
    write_json({"reports": [r.to_dict() for r in reports]}, out / "results.json")
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x_value", "method", "infidelity",
                         "ci_lower", "ci_upper", "variant"])
        for row in rows:
            writer.writerow([row["x_value"], row["method"],
                             repr(float(row["infidelity"])),
                             repr(float(row["ci_lower"])),
                             repr(float(row["ci_upper"])), row["variant"]])
    write_json(manifest, out / "manifest.json")
    logger.info("fidelity run complete: %d reports", len(reports))
    print(f"wrote {len(reports)} reports to {out}")
    return EXIT_OK


# ----------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinread",
        description="Readout-trace simulation and inference experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--config", help="JSON config file (a manifest works)")
        p.add_argument("--out", help="output directory")
        if seed:
            p.add_argument("--seed", type=int, help="explicit random seed")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                       help="worker threads for independent tasks")
        p.add_argument("--log-json", action="store_true",
                       help="machine-readable log lines on stderr")

    p = sub.add_parser("presets", help="list named scenario presets")
    p.add_argument("--log-json", action="store_true")
    p.set_defaults(fn=cmd_presets)

    p = sub.add_parser("generate", help="generate a trace set")
    common(p)
    p.add_argument("--scenario", help="preset name")
    p.add_argument("--n-test", type=int, dest="n_test", help="number of traces")
    p.add_argument("--length", type=int, help="trace length")
    p.add_argument("--csv", action="store_true", help="also write traces.csv")
    p.add_argument("--stamp", help="provenance timestamp for the sidecar")
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("train", help="calibrate a model from traces")
    common(p, seed=False)
    p.add_argument("--traces", nargs="+", required=True,
                   help="trace container(s); several for monte-carlo")
    p.add_argument("--state-model", choices=("psb", "elzerman"))
    p.add_argument("--freeze", help="comma list: pi,mu,sigma2,A")
    p.add_argument("--ci", choices=("likelihood-ratio", "monte-carlo"))
    p.add_argument("--sets", type=int, help="number of monte-carlo sets")
    p.add_argument("--ll-tolerance", type=float, default=0.001)
    p.add_argument("--max-iterations", type=int, default=1000)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("ci", help="confidence intervals for a trained model")
    common(p, seed=False)
    p.add_argument("--model", required=True, help="lambda_star.json path")
    p.add_argument("--traces", nargs="+", required=True)
    p.add_argument("--state-model", choices=("psb", "elzerman"))
    p.add_argument("--freeze", help="comma list: pi,mu,sigma2,A")
    p.add_argument("--ci", choices=("likelihood-ratio", "monte-carlo"),
                   default="likelihood-ratio")
    p.add_argument("--sets", type=int)
    p.add_argument("--ll-tolerance", type=float, default=0.001)
    p.add_argument("--max-iterations", type=int, default=1000)
    p.set_defaults(fn=cmd_ci)

    p = sub.add_parser("fidelity", help="run a fidelity experiment")
    common(p)
    p.add_argument("--scenario", help="preset name")
    p.add_argument("--methods", type=lambda s: tuple(s.split(",")),
                   help="comma list of methods to run")
    p.add_argument("--filter-ts", type=int, dest="filter_ts",
                   help="averaging-filter block size")
    p.add_argument("--n-test", type=int, dest="n_test")
    p.add_argument("--length", type=int)
    p.set_defaults(fn=cmd_fidelity)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    _setup_logging(getattr(args, "log_json", False))
    try:
        return args.fn(args)
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (SpinreadError, RuntimeError, FloatingPointError) as exc:
        logger.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except OSError as exc:
        logger.error("i/o error: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
