"""Shared fixtures: session-scoped overlap tables behind one temp cache."""

from __future__ import annotations

import os

import pytest

from halftrap.harness.config import ExperimentConfig
from halftrap.orbitals import build_overlap_table


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory) -> str:
    return str(tmp_path_factory.mktemp("table-cache"))


@pytest.fixture(scope="session")
def table6(cache_dir):
    return build_overlap_table(6, cache_dir=cache_dir)


@pytest.fixture(scope="session")
def table8(cache_dir):
    return build_overlap_table(8, cache_dir=cache_dir)


@pytest.fixture(scope="session")
def table64(cache_dir):
    return build_overlap_table(64, cache_dir=cache_dir)


@pytest.fixture(scope="session")
def table512(cache_dir):
    return build_overlap_table(512, cache_dir=cache_dir)


@pytest.fixture(scope="session")
def accept_cfg(cache_dir) -> ExperimentConfig:
    return ExperimentConfig.from_entries({"table.cache_dir": cache_dir})


@pytest.fixture(scope="session")
def accept_tables(table512) -> dict:
    # one shared pool so the battery reuses the big table across targets
    return {512: table512}


@pytest.fixture(scope="session")
def cli_env(cache_dir) -> dict:
    env = dict(os.environ)
    env["HALFTRAP_CACHE_DIR"] = cache_dir
    return env
