"""Session fixtures and the exporter acceptance summary hook."""

from __future__ import annotations

from pathlib import Path

import pytest

from toyset import (
    EXPORT_ACCEPTANCE,
    write_toy_images,
    write_toy_labels,
    write_toy_table,
)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if EXPORT_ACCEPTANCE:
        terminalreporter.write_sep("=", "exporter acceptance")
        for line in EXPORT_ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def toy_dataset(tmp_path_factory) -> Path:
    """images/, labels.tsv, and glove.toy.txt under one root."""
    root = tmp_path_factory.mktemp("toy")
    write_toy_images(root / "images")
    write_toy_labels(root / "labels.tsv")
    write_toy_table(root / "glove.toy.txt")
    return root
