# dfosparse
# (c) 2026 dfosparse contributors
# SPDX-License-Identifier: GPL-2.0-or-later

import typing
from pathlib import Path

import numpy as np
import pytest


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def config_home(monkeypatch: pytest.MonkeyPatch, tmp_path: Path
                ) -> typing.Iterator[Path]:
    """Point the XDG configuration lookup at an empty directory"""
    config_dir = tmp_path / "config"
    config_dir.mkdir()
    monkeypatch.setenv("XDG_CONFIG_HOME", str(config_dir))
    monkeypatch.setenv("XDG_CONFIG_DIRS", str(tmp_path / "nonexistent"))
    yield config_dir
