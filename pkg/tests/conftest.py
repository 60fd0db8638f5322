import os
from pathlib import Path

import pytest

from halin.closure import get_closure
from halin.model import Mode

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory) -> Path:
    env = os.environ.get("HALIN_CACHE_DIR")
    return Path(env) if env else tmp_path_factory.mktemp("closure-cache")


@pytest.fixture(scope="session")
def closures(cache_dir):
    """Lazily computed closures, shared by the whole session."""
    found = {}

    def get(mode):
        mode = Mode.parse(mode)
        if mode not in found:
            found[mode] = get_closure(mode, cache_dir)
        return found[mode]

    return get


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
