import os
from pathlib import Path

import pytest

from swarmids.dataset import apply_normalize, encode, fit_encoding, fit_normalize, parse_kdd

from _synth import make_kdd_csv


def nsl_kdd_train_path() -> Path | None:
    """Locate a real NSL-KDD train file, if one is available."""
    candidates = [os.environ.get("NSL_KDD_TRAIN")]
    here = Path(__file__).resolve().parent
    candidates += [
        here.parent / "data" / "KDDTrain+.txt",
        here / "data" / "KDDTrain+.txt",
    ]
    for candidate in candidates:
        if candidate and Path(candidate).exists():
            return Path(candidate)
    return None


requires_nsl_kdd = pytest.mark.skipif(
    nsl_kdd_train_path() is None,
    reason="real NSL-KDD train file not available (set NSL_KDD_TRAIN or place "
    "data/KDDTrain+.txt)",
)


@pytest.fixture(scope="session")
def synth_csv() -> str:
    return make_kdd_csv(900, seed=7)


@pytest.fixture(scope="session")
def synth_records(synth_csv):
    return parse_kdd(synth_csv)


@pytest.fixture(scope="session")
def synth_dataset(synth_records):
    encoding = fit_encoding(synth_records, fitted_on="test-synth")
    raw = encode(synth_records, encoding)
    return apply_normalize(raw, fit_normalize(raw))


@pytest.fixture()
def synth_file(tmp_path, synth_csv) -> Path:
    path = tmp_path / "synth_kdd.csv"
    path.write_text(synth_csv, encoding="utf-8")
    return path
