import json
from pathlib import Path

import pytest

from src.models import CavitySpec, DetectionChain, FitOptions

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def ref_spec() -> CavitySpec:
    return CavitySpec(length_mm=8.0, ref_index=2.138, loss_db_per_cm=0.13, r_out=0.77, r_hr=0.99)


@pytest.fixture
def ref_chain() -> DetectionChain:
    return DetectionChain(visibility=0.95, eta_prop=0.92, eta_pd=0.88)


@pytest.fixture
def run_config_path() -> Path:
    return DATA_DIR / "paper.json"


@pytest.fixture
def fit_options() -> FitOptions:
    return FitOptions(starts=4, seed=0)


@pytest.fixture
def write_config(tmp_path, run_config_path):
    """Копия paper.json с изменёнными секциями"""

    def _write(name: str = "run.json", **sections) -> Path:
        data = json.loads(run_config_path.read_text(encoding="utf-8"))
        for key, value in sections.items():
            if value is None:
                data.pop(key, None)
            elif isinstance(value, dict) and isinstance(data.get(key), dict):
                data[key] = {**data[key], **value}
            else:
                data[key] = value
        path = tmp_path / name
        path.write_text(json.dumps(data, indent=2), encoding="utf-8")
        return path

    return _write
