"""Command-line pipeline: prepare -> select -> evaluate, plus an all-in-one
``pipeline`` command.

Artifacts are stage-prefixed and embed the config digest and tool version,
so a run directory is auditable and interrupted runs show exactly which
stages completed. Reruns with the same config and seed are byte-identical
except the timing sidecar.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .classifier import SvmConfig
from .dataset import (
    CLASS_NAMES,
    FEATURE_NAMES,
    Dataset,
    apply_normalize,
    class_histogram,
    encode,
    encoding_to_text,
    fit_encoding,
    fit_normalize,
    map_label,
    norm_stats_to_text,
    parse_kdd,
    stratified_sample_indices,
)
from .errors import ConfigError, DataError, SwarmidsError
from .evaluation import METRIC_NAMES, cross_validate, report_to_json
from .optimizer import GoaConfig, history_csv, run
from .seeds import derive_seed
from .selection import WrapperObjective
from .svg import bar_chart, line_chart


@dataclass(frozen=True)
class RunConfig:
    """Full run configuration; every field has a default and a persisted
    config replays a run bit-identically (timing aside)."""

    data: str = ""
    out: str = "swarmids_out"
    seed: int = 0
    folds: int = 10
    subsample: int = 20000          # 0 keeps all rows
    pop: int = 30
    iters: int = 40
    delta_stop: float = 1e-3
    c_max: float = 1.0
    c_min: float = 1e-5
    s_f: float = 0.5
    s_l: float = 1.5
    swap_prob: float = 0.2
    rev_prob: float = 1.0
    svm_c: float = 1.0
    epochs: int = 20
    step_offset: float = 0.0        # 0 = auto (ceil(C*N))
    fitness_epochs: int = 5
    threads: int = 0                # 0 = number of processors
    plots: bool = True

    def goa_config(self, seed: int, dim: int = len(FEATURE_NAMES)) -> GoaConfig:
        return GoaConfig(
            population_size=self.pop,
            dim=dim,
            max_iterations=self.iters,
            fitness_delta_stop=self.delta_stop,
            c_max=self.c_max,
            c_min=self.c_min,
            s_f=self.s_f,
            s_l=self.s_l,
            swap_prob=self.swap_prob,
            reversion_prob=self.rev_prob,
            seed=seed,
        )

    def svm_config(self, seed: int) -> SvmConfig:
        offset = None if self.step_offset == 0.0 else self.step_offset
        return SvmConfig(c=self.svm_c, epochs=self.epochs, step_offset=offset, seed=seed)


def config_to_text(config: RunConfig) -> str:
    lines = [f"{f.name}={getattr(config, f.name)}" for f in fields(RunConfig)]
    return "\n".join(lines) + "\n"


def _coerce(name: str, kind: type, raw: str):
    try:
        if kind is bool:
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"config key {name!r}: cannot parse {raw!r} as {kind.__name__}") from None


def config_from_text(text: str) -> RunConfig:
    """Parse a flat key=value config; unknown keys are hard errors."""
    known = {f.name: f.type for f in fields(RunConfig)}
    kinds = {"data": str, "out": str, "plots": bool}
    for f in fields(RunConfig):
        if f.name not in kinds:
            kinds[f.name] = type(getattr(RunConfig(), f.name))
    values = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"config line is not key=value: {raw!r}")
        if key not in known:
            raise ConfigError(f"unknown config key: {key!r}")
        values[key] = _coerce(key, kinds[key], value.strip())
    return replace(RunConfig(), **values)


def config_digest(config: RunConfig) -> str:
    """Digest of the run configuration, excluding the output location so
    identical runs into different directories share identical artifacts."""
    canonical = config_to_text(replace(config, out=""))
    return hashlib.blake2b(canonical.encode("utf-8"), digest_size=8).hexdigest()


def _meta(config: RunConfig, stage: str) -> dict[str, str]:
    return {
        "tool": f"swarmids {__version__}",
        "stage": stage,
        "config_digest": config_digest(config),
    }


def _meta_lines(meta: dict[str, str]) -> str:
    return "".join(f"# {k}={v}\n" for k, v in meta.items())


def _out_dir(config: RunConfig) -> Path:
    path = Path(config.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write(path: Path, content: str) -> None:
    path.write_text(content, encoding="utf-8")


def _threads(config: RunConfig) -> int:
    if config.threads > 0:
        return config.threads
    return os.cpu_count() or 1


def _load_records(path: str):
    if not path:
        raise ConfigError("no dataset path given (use --data or a config file)")
    file = Path(path)
    if not file.exists():
        raise DataError(f"dataset file not found: {file}")
    with file.open("r", encoding="utf-8") as stream:
        return parse_kdd(stream)


def _record_line(record) -> str:
    tail = [record.label] if record.difficulty is None else [record.label, str(record.difficulty)]
    return ",".join(list(record.features) + tail)


def cmd_prepare(config: RunConfig) -> int:
    """Parse, subsample, encode, and normalize; write audit artifacts."""
    out = _out_dir(config)
    meta = _meta(config, "prepare")
    stage_seed = derive_seed(config.seed, "prepare")

    records = _load_records(config.data)
    if not records:
        raise DataError(f"no records in {config.data}")
    labels = np.array([map_label(r.label) for r in records], dtype=np.int64)

    n = config.subsample
    if n and n < len(records):
        keep = stratified_sample_indices(labels, n, derive_seed(stage_seed, "subsample"))
        records = [records[int(i)] for i in keep]
        labels = labels[keep]
    elif n > len(records):
        print(
            f"note: subsample {n} exceeds {len(records)} rows; keeping all",
            file=sys.stderr,
        )

    encoding = fit_encoding(records, fitted_on=f"prepare[{len(records)} rows]")
    raw_ds = encode(records, encoding)
    stats = fit_normalize(raw_ds)
    normalized = apply_normalize(raw_ds, stats)

    _write(out / "prepare_config.txt", _meta_lines(meta) + config_to_text(config))
    _write(
        out / "prepare_data.csv",
        _meta_lines({**meta, "rows": str(len(records))})
        + "\n".join(_record_line(r) for r in records)
        + "\n",
    )
    _write(out / "prepare_encoding.txt", encoding_to_text(encoding, meta))
    _write(out / "prepare_norm_stats.txt", norm_stats_to_text(stats, meta))
    histogram = class_histogram(labels)
    _write(
        out / "prepare_class_histogram.csv",
        _meta_lines(meta) + "class,count\n"
        + "".join(f"{name},{count}\n" for name, count in histogram.items()),
    )
    matrix_lines = [
        ",".join(repr(float(v)) for v in row) + f",{label}"
        for row, label in zip(normalized.rows, normalized.labels)
    ]
    _write(
        out / "prepare_encoded.csv",
        _meta_lines({**meta, "columns": "41 normalized features + label index"})
        + "\n".join(matrix_lines)
        + "\n",
    )
    print(
        f"prepared {normalized.n_rows} rows, {normalized.n_features} features, "
        f"{len(CLASS_NAMES)} classes -> {out}"
    )
    return 0


def _read_prepared(config: RunConfig):
    path = Path(config.out) / "prepare_data.csv"
    if not path.exists():
        raise DataError(f"prepared artifact missing: {path} (run prepare first)")
    with path.open("r", encoding="utf-8") as stream:
        return parse_kdd(stream)


def cmd_select(config: RunConfig) -> int:
    """Run feature selection on the prepared data; write mask, history, plot."""
    out = _out_dir(config)
    meta = _meta(config, "select")
    stage_seed = derive_seed(config.seed, "select")

    records = _read_prepared(config)
    encoding = fit_encoding(records, fitted_on=f"select[{len(records)} rows]")
    raw_ds = encode(records, encoding)
    stats = fit_normalize(raw_ds)
    dataset = apply_normalize(raw_ds, stats)

    with (out / "select_trace.csv").open("w", encoding="utf-8") as trace:
        trace.write(_meta_lines(meta))
        objective = WrapperObjective(
            dataset,
            run_seed=derive_seed(stage_seed, "fitness"),
            svm_config=config.svm_config(seed=0),
            fitness_epochs=config.fitness_epochs,
            trace=trace,
        )
        goa = config.goa_config(seed=derive_seed(stage_seed, "goa"), dim=dataset.n_features)
        result = run(objective, goa)
        breakdown = objective.breakdown(result.best_mask)
    mask_bits = "".join("1" if b else "0" for b in result.best_mask)
    selected = [FEATURE_NAMES[i] for i in np.flatnonzero(result.best_mask)]
    mask_lines = [
        f"mask={mask_bits}",
        f"popcount={breakdown.n_f}",
        f"fitness={breakdown.fitness!r}",
        f"r_tp={breakdown.r_tp!r}",
        f"r_e={breakdown.r_e!r}",
        f"stop_reason={result.stop_reason}",
        f"iterations={len(result.history)}",
    ] + [f"selected.{i}={name}" for i, name in enumerate(selected)]
    _write(out / "select_config.txt", _meta_lines(meta) + config_to_text(config))
    _write(out / "select_mask.txt", _meta_lines(meta) + "\n".join(mask_lines) + "\n")
    _write(out / "select_history.csv", _meta_lines(meta) + history_csv(result.history))
    if config.plots:
        xs = [rec.iteration for rec in result.history]
        ys = [rec.best_fitness for rec in result.history]
        _write(
            out / "select_convergence.svg",
            line_chart(xs, ys, "Best fitness per iteration", "iteration", "fitness", meta),
        )
    print(
        f"selected {breakdown.n_f}/{dataset.n_features} features "
        f"(fitness {breakdown.fitness:.4f}, {len(result.history)} iterations) -> {out}"
    )
    return 0


def cmd_evaluate(config: RunConfig) -> int:
    """Cross-validate the pipeline on the prepared data; write report and plots."""
    out = _out_dir(config)
    meta = _meta(config, "evaluate")
    stage_seed = derive_seed(config.seed, "evaluate")

    records = _read_prepared(config)
    started = time.perf_counter()
    report = cross_validate(
        records,
        k=config.folds,
        goa_config=config.goa_config(seed=0),
        svm_config=config.svm_config(seed=0),
        seed=stage_seed,
        fitness_epochs=config.fitness_epochs,
        threads=_threads(config),
    )
    elapsed = time.perf_counter() - started

    _write(out / "evaluate_config.txt", _meta_lines(meta) + config_to_text(config))
    _write(out / "evaluate_report.json", report_to_json(report, include_timing=False, meta=meta))
    _write(
        out / "evaluate_timing.json",
        json.dumps(
            {
                "meta": meta,
                "total_seconds": elapsed,
                "fold_seconds": [f.seconds for f in report.folds],
                "kernel_backend": BACKEND,
                "threads": _threads(config),
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
    )
    confusion_lines = ["fold,class,tp,fn,fp,tn"]
    for fold in report.folds:
        for name in report.class_names:
            c = fold.metrics.per_class[name].counts
            confusion_lines.append(f"{fold.index},{name},{c.tp},{c.fn},{c.fp},{c.tn}")
    _write(
        out / "evaluate_confusion.csv",
        _meta_lines(meta) + "\n".join(confusion_lines) + "\n",
    )
    if config.plots:
        for metric in METRIC_NAMES:
            labels = list(report.class_names) + ["Average"]
            per_class = [
                float(np.mean([f.metrics.per_class[name].value(metric) for f in report.folds]))
                for name in report.class_names
            ]
            values = per_class + [report.macro_mean[metric]]
            _write(
                out / f"evaluate_{metric}.svg",
                bar_chart(
                    labels,
                    values,
                    f"{metric.upper()} per class (mean over {report.k} folds)",
                    metric.upper(),
                    meta,
                ),
            )
    print(
        f"evaluated {report.k} folds: macro accuracy "
        f"{report.macro_mean['accuracy']:.4f} ± {report.macro_std['accuracy']:.4f} -> {out}"
    )
    return 0


def cmd_pipeline(config: RunConfig) -> int:
    """prepare, select, and evaluate in sequence under one master seed."""
    for stage in (cmd_prepare, cmd_select, cmd_evaluate):
        code = stage(config)
        if code != 0:
            return code
    return 0


_COMMANDS = {
    "prepare": cmd_prepare,
    "select": cmd_select,
    "evaluate": cmd_evaluate,
    "pipeline": cmd_pipeline,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


_FLAG_DESTS = {
    "data": "--data", "out": "--out", "seed": "--seed", "folds": "--folds",
    "subsample": "--subsample", "pop": "--pop", "iters": "--iters",
    "delta_stop": "--delta-stop", "c_max": "--c-max", "c_min": "--c-min",
    "s_f": "--s-f", "s_l": "--s-l", "swap_prob": "--swap-prob",
    "rev_prob": "--rev-prob", "svm_c": "--svm-c", "epochs": "--epochs",
    "step_offset": "--step-offset", "fitness_epochs": "--fitness-epochs",
    "threads": "--threads",
}


def build_parser() -> _Parser:
    parser = _Parser(prog="swarmids", description=__doc__)
    parser.add_argument("--version", action="version", version=f"swarmids {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    defaults = RunConfig()
    for name, command in _COMMANDS.items():
        p = sub.add_parser(name, help=command.__doc__)
        p.add_argument("--config", default=None, help="key=value config file")
        for field_name, flag in _FLAG_DESTS.items():
            default = getattr(defaults, field_name)
            p.add_argument(
                flag,
                dest=field_name,
                type=type(default),
                default=None,
                help=f"default: {default}",
            )
        p.add_argument(
            "--no-plots", dest="no_plots", action="store_true", help="skip SVG output"
        )
    return parser


def _merge_config(args: argparse.Namespace) -> RunConfig:
    if args.config is not None:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        config = config_from_text(path.read_text(encoding="utf-8"))
    else:
        config = RunConfig()
    overrides = {
        name: getattr(args, name)
        for name in _FLAG_DESTS
        if getattr(args, name) is not None
    }
    if args.no_plots:
        overrides["plots"] = False
    return replace(config, **overrides)


def main(argv: list[str] | None = None) -> int:
    """Entry point returning the process exit code."""
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        config = _merge_config(args)
        return _COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except SwarmidsError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    raise SystemExit(main())
