import numpy as np
import pytest

from icdlab.embeddings import WordVectorTable


@pytest.fixture
def tiny_table():
    return WordVectorTable({"a": [1.0, 0.0], "b": [0.0, 1.0], "w": [3.0, 4.0]})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


# one (name, passed, detail) entry per acceptance criterion, printed at the end of the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
