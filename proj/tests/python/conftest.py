import json
import os
import pathlib

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def configs_dir():
    return pathlib.Path(os.environ.get("RFLOW_CONFIGS", ROOT / "configs"))


@pytest.fixture(scope="session")
def data_dir():
    return pathlib.Path(os.environ.get("RFLOW_TEST_DATA", ROOT / "tests" / "data"))


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("RFLOW_CLI")
    if not path:
        pytest.skip("RFLOW_CLI not set")
    return path


@pytest.fixture
def small_config(tmp_path, configs_dir):
    """small.json with a cheap CV setting, written next to an output dir."""
    cfg = json.loads((configs_dir / "small.json").read_text())
    cfg["scenario"] = str(configs_dir / "scenarios" / "small.json")
    cfg["cv"] = {"enabled": True, "horizons": [1, 6], "refit_every": 360}
    cfg["output_dir"] = str(tmp_path / "out")
    path = tmp_path / "small.json"
    path.write_text(json.dumps(cfg))
    return path
