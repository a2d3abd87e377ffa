import shutil
from pathlib import Path

import pytest
from hypothesis import settings

from sacekit.fixtures import materialize_fixture
from sacekit.project import load_project

settings.register_profile("repo", deadline=None, max_examples=100)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def robot_dir(tmp_path_factory) -> Path:
    return materialize_fixture(tmp_path_factory.mktemp("robot") / "p")


@pytest.fixture(scope="session")
def robot(robot_dir):
    return load_project(robot_dir)


@pytest.fixture
def robot_copy(robot_dir, tmp_path) -> Path:
    """A private copy of the example project that a test may modify."""
    dest = tmp_path / "p"
    shutil.copytree(robot_dir, dest)
    return dest


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
