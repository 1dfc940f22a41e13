"""Pytest configuration and fixtures."""

import tempfile
from pathlib import Path

import pytest
import toml

from gfftkit.config.manager import ConfigManager
from gfftkit.config.models import RunConfig
from gfftkit.core.cmspace import standard_basis
from gfftkit.core.timefns import SpaceConfig, make_space


@pytest.fixture(autouse=True)
def isolated_home(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    """Keep logs and runtime files out of the user's home directory."""
    home = tmp_path / "gfft_home"
    monkeypatch.setenv("GFFT_HOME", str(home))
    monkeypatch.setenv("GFFT_THREADS", "2")
    return home


@pytest.fixture
def temp_config_dir():
    """Provide a temporary configuration directory."""
    with tempfile.TemporaryDirectory() as temp_dir:
        yield Path(temp_dir)


@pytest.fixture
def config_manager(temp_config_dir):
    """Provide a ConfigManager with temporary directory."""
    return ConfigManager(temp_config_dir)


@pytest.fixture
def wiener() -> SpaceConfig:
    """Standard Wiener space: a ≡ 0, b(t) = t on [0, 1]."""
    return make_space("zero", [], "linear", [1.0], T=1.0, grid_n=1024, label="wiener")


@pytest.fixture
def drifted() -> SpaceConfig:
    """a(t) = t, b(t) = t on [0, 1]."""
    return make_space("linear", [1.0], "linear", [1.0], T=1.0, grid_n=1024, label="drifted")


@pytest.fixture
def quadratic() -> SpaceConfig:
    """a(t) = t, b(t) = t² + t on [0, 1]."""
    return make_space(
        "linear", [1.0], "poly", [0.0, 1.0, 1.0], T=1.0, grid_n=1024, label="quadratic"
    )


@pytest.fixture
def coarse() -> SpaceConfig:
    """Small grid for Monte-Carlo heavy tests: a(t) = t, b(t) = t."""
    return make_space("linear", [1.0], "linear", [1.0], T=1.0, grid_n=128, label="coarse")


@pytest.fixture
def basis16(drifted: SpaceConfig):
    return standard_basis(16, drifted)


def run_data(**overrides: object) -> dict[str, object]:
    """A small one-atom run configuration as a plain dict."""
    data: dict[str, object] = {
        "space": {
            "a_family": "linear",
            "a_params": [1.0],
            "b_family": "linear",
            "b_params": [1.0],
            "T": 1.0,
            "grid_n": 128,
        },
        "elements": {"beta": [1.0], "ramp": [0.0, 1.0]},
        "operators": {"phi1_poly": [1.0], "phi2_poly": [0.5, 0.5]},
        "measure": {"atoms": [{"coef_re": 0.7, "coef_im": 0.2, "z_poly": [0.3, -0.4]}]},
        "run": {
            "q0": 0.5,
            "q1": 1.0,
            "q2": -1.0,
            "samples": 400,
            "seed": 7,
            "n_list": [2, 4, 8],
            "basis_size": 8,
            "g1": "beta",
            "g2": "ramp",
        },
    }
    for section, values in overrides.items():
        if isinstance(values, dict) and isinstance(data.get(section), dict):
            data[section] = {**data[section], **values}  # type: ignore[dict-item]
        else:
            data[section] = values
    return data


@pytest.fixture
def write_config(tmp_path: Path):
    """Write a run configuration file and return its path."""

    def _write(name: str = "run.toml", **overrides: object) -> Path:
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as f:
            toml.dump(run_data(**overrides), f)
        return path

    return _write


@pytest.fixture
def make_run():
    """Build a validated RunConfig from run_data overrides."""

    def _make(**overrides: object) -> RunConfig:
        return RunConfig(**run_data(**overrides))

    return _make
