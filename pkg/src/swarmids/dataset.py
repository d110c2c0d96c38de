"""NSL-KDD ingestion: parsing, categorical encoding, label mapping,
min-max normalization, and stratified sampling/folding.

String-valued columns are detected from the data and encoded with
deterministic first-occurrence ordinal codes. The attack-name to
category mapping ships as a versioned table under ``data/``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError, DataWarning, ParseError, UnknownLabelError

CLASS_NAMES = ("Normal", "DoS", "Probe", "U2R", "R2L")

FEATURE_NAMES = (
    "duration", "protocol_type", "service", "flag", "src_bytes",
    "dst_bytes", "land", "wrong_fragment", "urgent", "hot",
    "num_failed_logins", "logged_in", "num_compromised", "root_shell",
    "su_attempted", "num_root", "num_file_creations", "num_shells",
    "num_access_files", "num_outbound_cmds", "is_host_login",
    "is_guest_login", "count", "srv_count", "serror_rate",
    "srv_serror_rate", "rerror_rate", "srv_rerror_rate", "same_srv_rate",
    "diff_srv_rate", "srv_diff_host_rate", "dst_host_count",
    "dst_host_srv_count", "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate", "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate", "dst_host_serror_rate",
    "dst_host_srv_serror_rate", "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
)

N_FEATURES = len(FEATURE_NAMES)


def _load_attack_table() -> dict[str, int]:
    table = {}
    text = resources.files("swarmids.data").joinpath("attack_categories.tsv").read_text("utf-8")
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, category = line.split("\t")
        table[name] = CLASS_NAMES.index(category)
    return table


ATTACK_CATEGORIES: dict[str, int] = _load_attack_table()


@dataclass(frozen=True)
class RawRecord:
    """One connection record: 41 string features, attack name, optional
    trailing difficulty score (metadata, never a feature)."""

    features: tuple[str, ...]
    label: str
    difficulty: int | None = None


@dataclass(frozen=True)
class EncodingTable:
    """Per-column value-to-code maps for string-valued columns.

    Codes are contiguous from 0 in first-occurrence order. Values unseen
    at fit time encode to ``len(column map)``.
    """

    columns: Mapping[int, Mapping[str, int]]
    fitted_on: str = "unspecified"

    def decode(self, column: int, code: int) -> str:
        """Inverse lookup for a seen code."""
        for value, c in self.columns[column].items():
            if c == code:
                return value
        raise DataError(f"code {code} not present in column {column}")


def _freeze_rows(rows: np.ndarray) -> np.ndarray:
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    rows.setflags(write=False)
    return rows


@dataclass(frozen=True)
class Dataset:
    """Encoded feature matrix with integer class labels.

    Immutable after construction; safe to share across worker threads.
    """

    rows: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...] = CLASS_NAMES

    def __post_init__(self):
        rows = _freeze_rows(self.rows)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        labels.setflags(write=False)
        if rows.ndim != 2:
            raise DataError("rows must be a 2-d matrix")
        if labels.shape != (rows.shape[0],):
            raise DataError("labels length must match row count")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]

    def take(self, indices: np.ndarray) -> "Dataset":
        """Materialize an index view as a new Dataset."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.rows[idx], self.labels[idx], self.class_names)


@dataclass(frozen=True)
class NormStats:
    """Per-feature min/max fitted on training rows only."""

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        mins = _freeze_rows(np.atleast_2d(self.mins))[0]
        maxs = _freeze_rows(np.atleast_2d(self.maxs))[0]
        if np.any(maxs < mins):
            raise DataError("per-feature max must be >= min")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)


def parse_kdd(source: Iterable[str] | str) -> list[RawRecord]:
    """Parse comma-separated NSL-KDD lines (42 or 43 fields) into records.

    Accepts an open text file, any iterable of lines, or a whole string.
    Blank lines and ``#`` comment lines are skipped. A 43rd field is the
    difficulty score and must be an integer.
    """
    lines = source.splitlines() if isinstance(source, str) else source
    records: list[RawRecord] = []
    for line_no, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        fields = text.split(",")
        if len(fields) == N_FEATURES + 1:
            difficulty = None
        elif len(fields) == N_FEATURES + 2:
            try:
                difficulty = int(fields[-1])
            except ValueError:
                raise ParseError(
                    f"difficulty field is not an integer: {fields[-1]!r}", line_no
                ) from None
        else:
            raise ParseError(
                f"expected {N_FEATURES + 1} or {N_FEATURES + 2} fields, got {len(fields)}",
                line_no,
            )
        features = tuple(f.strip() for f in fields[:N_FEATURES])
        label = fields[N_FEATURES].strip().lower()
        records.append(RawRecord(features, label, difficulty))
    return records


def map_label(name: str) -> int:
    """Map an attack name to its class index in ``CLASS_NAMES``."""
    try:
        return ATTACK_CATEGORIES[name.strip().lower()]
    except KeyError:
        raise UnknownLabelError(name) from None


def _is_float(value: str) -> bool:
    try:
        float(value)
    except ValueError:
        return False
    return True


def fit_encoding(records: Sequence[RawRecord], fitted_on: str = "unspecified") -> EncodingTable:
    """Build first-occurrence ordinal code maps for string-valued columns."""
    if not records:
        raise DataError("cannot fit an encoding on zero records")
    # Ordered distinct values per column; categorical columns are the ones
    # holding at least one non-numeric value.
    distinct: list[dict[str, None]] = [dict() for _ in range(N_FEATURES)]
    for record in records:
        for col, value in enumerate(record.features):
            distinct[col].setdefault(value)
    columns: dict[int, dict[str, int]] = {}
    for col, values in enumerate(distinct):
        if all(_is_float(v) for v in values):
            continue
        columns[col] = {value: code for code, value in enumerate(values)}
    return EncodingTable(columns=columns, fitted_on=fitted_on)


def encode(records: Sequence[RawRecord], table: EncodingTable) -> Dataset:
    """Encode records to a numeric matrix (unnormalized) plus class labels."""
    n = len(records)
    rows = np.empty((n, N_FEATURES), dtype=np.float64)
    for col in range(N_FEATURES):
        raw = [r.features[col] for r in records]
        mapping = table.columns.get(col)
        if mapping is not None:
            unseen = len(mapping)
            rows[:, col] = [mapping.get(v, unseen) for v in raw]
        else:
            try:
                rows[:, col] = np.asarray(raw, dtype=np.float64)
            except ValueError:
                bad = next(i for i, v in enumerate(raw) if not _is_float(v))
                raise DataError(
                    f"non-numeric value {raw[bad]!r} in numeric column "
                    f"{col} ({FEATURE_NAMES[col]}), record {bad}"
                ) from None
    labels = np.fromiter((map_label(r.label) for r in records), dtype=np.int64, count=n)
    return Dataset(rows, labels)


def fit_normalize(dataset: Dataset) -> NormStats:
    """Fit per-feature min/max. Call on training rows only."""
    return NormStats(dataset.rows.min(axis=0), dataset.rows.max(axis=0))


def apply_normalize(dataset: Dataset, stats: NormStats) -> Dataset:
    """Min-max scale to [0, 1] with clipping; degenerate features map to 0."""
    span = stats.maxs - stats.mins
    safe = np.where(span > 0, span, 1.0)
    scaled = (dataset.rows - stats.mins) / safe
    scaled = np.where(span > 0, scaled, 0.0)
    return Dataset(np.clip(scaled, 0.0, 1.0), dataset.labels, dataset.class_names)


def stratified_sample_indices(labels: np.ndarray, n: int, seed: int) -> np.ndarray:
    """Pick ``n`` row indices preserving class proportions within one row.

    Deterministic for a fixed seed; result is sorted ascending.
    """
    labels = np.asarray(labels)
    total = labels.shape[0]
    if n <= 0:
        raise DataError("subsample size must be positive")
    if n > total:
        raise DataError(f"subsample size {n} exceeds row count {total}")
    if n == total:
        return np.arange(total, dtype=np.int64)
    rng = np.random.default_rng(seed)
    classes, counts = np.unique(labels, return_counts=True)
    exact = counts * (n / total)
    base = np.floor(exact).astype(np.int64)
    remainder = n - int(base.sum())
    # Hand out leftover rows by largest fractional part, class index breaking ties.
    order = np.lexsort((np.arange(len(classes)), -(exact - base)))
    for j in order[:remainder]:
        base[j] += 1
    picks = []
    for cls, take in zip(classes, base):
        pool = np.flatnonzero(labels == cls)
        if take > 0:
            picks.append(rng.choice(pool, size=int(take), replace=False))
    return np.sort(np.concatenate(picks).astype(np.int64))


def stratified_subsample(dataset: Dataset, n: int, seed: int) -> Dataset:
    """Stratified subsample of an encoded dataset."""
    return dataset.take(stratified_sample_indices(dataset.labels, n, seed))


def stratified_fold_indices(
    labels: np.ndarray, k: int, seed: int
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Stratified k-fold split over label array; returns (train, test) index
    pairs. Test folds partition the full index set.

    A class with fewer than ``k`` rows is spread best-effort over the first
    folds and a ``DataWarning`` is emitted.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise DataError("k must be at least 2")
    if k > labels.shape[0]:
        raise DataError(f"k={k} exceeds row count {labels.shape[0]}")
    rng = np.random.default_rng(seed)
    buckets: list[list[np.ndarray]] = [[] for _ in range(k)]
    for cls in np.unique(labels):
        pool = rng.permutation(np.flatnonzero(labels == cls))
        if pool.shape[0] < k:
            warnings.warn(
                f"class {cls} has {pool.shape[0]} rows < k={k}; "
                "distributing best-effort",
                DataWarning,
                stacklevel=2,
            )
        for fold, chunk in enumerate(np.array_split(pool, k)):
            buckets[fold].append(chunk)
    all_idx = np.arange(labels.shape[0], dtype=np.int64)
    folds = []
    for fold in range(k):
        test = np.sort(np.concatenate(buckets[fold]).astype(np.int64))
        train = np.setdiff1d(all_idx, test, assume_unique=True)
        folds.append((train, test))
    return folds


def k_folds(dataset: Dataset, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Stratified folds over a dataset; pairs of index views (no copying)."""
    return stratified_fold_indices(dataset.labels, k, seed)


def class_histogram(labels: np.ndarray, class_names: Sequence[str] = CLASS_NAMES) -> dict[str, int]:
    """Row count per class name, including absent classes."""
    labels = np.asarray(labels)
    return {name: int(np.sum(labels == i)) for i, name in enumerate(class_names)}


# --- human-readable artifact files -------------------------------------------

def _header_lines(header: Mapping[str, str] | None) -> list[str]:
    if not header:
        return []
    return [f"# {key}={value}" for key, value in header.items()]


def encoding_to_text(table: EncodingTable, header: Mapping[str, str] | None = None) -> str:
    """Serialize an encoding table as auditable key=value lines."""
    lines = _header_lines(header)
    lines.append(f"fitted_on={table.fitted_on}")
    for col in sorted(table.columns):
        mapping = table.columns[col]
        lines.append(f"column.{col}.name={FEATURE_NAMES[col]}")
        for value, code in mapping.items():
            if "=" in value or "\n" in value:
                raise DataError(f"cannot serialize categorical value {value!r}")
            lines.append(f"column.{col}.code.{value}={code}")
    return "\n".join(lines) + "\n"


def encoding_from_text(text: str) -> EncodingTable:
    """Parse the key=value encoding artifact back into a table."""
    fitted_on = "unspecified"
    columns: dict[int, dict[str, int]] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        if key == "fitted_on":
            fitted_on = value
        elif key.startswith("column."):
            parts = key[len("column."):].split(".", 2)
            if len(parts) == 3 and parts[1] == "code":
                columns.setdefault(int(parts[0]), {})[parts[2]] = int(value)
            elif len(parts) != 2 or parts[1] != "name":
                raise DataError(f"unrecognized encoding artifact line: {raw!r}")
        else:
            raise DataError(f"unrecognized encoding artifact line: {raw!r}")
    ordered = {
        col: dict(sorted(mapping.items(), key=lambda kv: kv[1]))
        for col, mapping in sorted(columns.items())
    }
    return EncodingTable(columns=ordered, fitted_on=fitted_on)


def norm_stats_to_text(stats: NormStats, header: Mapping[str, str] | None = None) -> str:
    """Serialize normalization stats; float repr round-trips exactly."""
    lines = _header_lines(header)
    for i, (lo, hi) in enumerate(zip(stats.mins, stats.maxs)):
        lines.append(f"feature.{i}.name={FEATURE_NAMES[i] if i < N_FEATURES else i}")
        lines.append(f"feature.{i}.min={float(lo)!r}")
        lines.append(f"feature.{i}.max={float(hi)!r}")
    return "\n".join(lines) + "\n"


def norm_stats_from_text(text: str) -> NormStats:
    mins: dict[int, float] = {}
    maxs: dict[int, float] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        if not key.startswith("feature."):
            raise DataError(f"unrecognized stats artifact line: {raw!r}")
        _, idx_str, kind = key.split(".", 2)
        if kind == "min":
            mins[int(idx_str)] = float(value)
        elif kind == "max":
            maxs[int(idx_str)] = float(value)
    if sorted(mins) != sorted(maxs):
        raise DataError("stats artifact has mismatched min/max entries")
    order = sorted(mins)
    return NormStats(
        np.array([mins[i] for i in order]), np.array([maxs[i] for i in order])
    )
