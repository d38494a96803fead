"""Embedding table loading and name composition."""

import numpy as np
import pytest

from fpexport.embeddings import load_table
from fpexport.errors import InputError


def write(tmp_path, text):
    p = tmp_path / "vectors.txt"
    p.write_text(text)
    return p


class TestLoad:
    def test_dim_and_lookup(self, tmp_path):
        table = load_table(write(tmp_path, "red 1 2 3\ncar 4 5 6\n"))
        assert table.dim == 3
        assert len(table) == 2
        assert np.array_equal(table.embed_name("red"), [1.0, 2.0, 3.0])

    def test_ragged_rows_rejected(self, tmp_path):
        with pytest.raises(InputError, match="width"):
            load_table(write(tmp_path, "red 1 2 3\ncar 4 5\n"))

    def test_duplicate_token_rejected(self, tmp_path):
        with pytest.raises(InputError, match="duplicate"):
            load_table(write(tmp_path, "red 1 2\nred 3 4\n"))

    def test_non_numeric_rejected(self, tmp_path):
        with pytest.raises(InputError, match="non-numeric"):
            load_table(write(tmp_path, "red 1 x\n"))

    def test_empty_table_rejected(self, tmp_path):
        with pytest.raises(InputError, match="no vectors"):
            load_table(write(tmp_path, "\n"))

    def test_missing_file_named(self, tmp_path):
        with pytest.raises(InputError, match="missing"):
            load_table(tmp_path / "absent.txt")


class TestNames:
    def test_multi_word_name_is_word_mean(self, tmp_path):
        table = load_table(write(tmp_path, "fountain 1 2\npen 3 4\n"))
        assert np.allclose(table.embed_name("fountain pen"), [2.0, 3.0])

    def test_missing_word_is_hard_error(self, tmp_path):
        table = load_table(write(tmp_path, "fountain 1 2\n"))
        with pytest.raises(InputError, match="'pen'"):
            table.embed_name("fountain pen")

    def test_embed_names_stacks_float32(self, tmp_path):
        table = load_table(write(tmp_path, "red 1 2\ncar 3 4\n"))
        block = table.embed_names(["red", "car"])
        assert block.dtype == np.float32
        assert block.shape == (2, 2)
