"""End-to-end command-line runs, in process, checking exit codes."""

import json

import pytest

from compzsl.cli import main, parse_query
from compzsl.errors import ConfigError
from compzsl.model import BLOB_NAME, DESC_NAME

SMALL_PACK = ["--attrs", "4", "--objs", "4", "--seen", "8", "--unseen", "4",
              "--per-comp", "4", "--visual-dim", "8", "--embed-dim", "6",
              "--seed", "3"]
SMALL_TRAIN = ["--epochs", "2", "--batch-size", "8", "--latent-dim", "6",
               "--lr", "1e-3", "--seed", "3"]


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """One pack and one trained model shared by the read-only commands."""
    root = tmp_path_factory.mktemp("cli")
    pack = root / "pack"
    model = root / "model"
    assert main(["gen-synth", "--out", str(pack), *SMALL_PACK]) == 0
    assert main(["train", "--pack", str(pack), "--out", str(model),
                 *SMALL_TRAIN]) == 0
    return root


class TestGenSynth:
    def test_default_grid_writes_1400_images(self, tmp_path, capsys):
        out = tmp_path / "pack"
        assert main(["gen-synth", "--out", str(out)]) == 0
        assert f"wrote 1400 images to {out}" in capsys.readouterr().out
        doc = json.loads((out / "manifest.json").read_text())
        assert len(doc["images"]) == 1400

    def test_same_seed_same_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["gen-synth", "--out", str(a), *SMALL_PACK]) == 0
        assert main(["gen-synth", "--out", str(b), *SMALL_PACK]) == 0
        for name in ("manifest.json", "visual.f32", "embeddings.f32"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_partition_larger_than_grid_exits_2(self, tmp_path, capsys):
        code = main(["gen-synth", "--out", str(tmp_path / "p"),
                     "--attrs", "6", "--objs", "6",
                     "--seen", "40", "--unseen", "8"])
        assert code == 2
        assert "error:" in capsys.readouterr().err


class TestTrain:
    def test_writes_model_and_log(self, workdir, capsys):
        model = workdir / "model"
        assert (model / DESC_NAME).is_file()
        assert (model / BLOB_NAME).is_file()
        log = (model / "train.log").read_text().strip().splitlines()
        assert len(log) == 2
        assert all("total" in line for line in log)

    def test_ablation_flags_compose(self, workdir, tmp_path, capsys):
        code = main(["train", "--pack", str(workdir / "pack"),
                     "--out", str(tmp_path / "m"), *SMALL_TRAIN,
                     "--no-cluster", "--graph", "none", "--loss", "fus",
                     "--gcn-layers", "1"])
        assert code == 0
        desc = json.loads((tmp_path / "m" / DESC_NAME).read_text())
        assert desc["config"]["clustering_enabled"] is False
        assert desc["config"]["graph_kind"] == "none"
        assert desc["config"]["beta"] == 0.0
        assert desc["config"]["gcn_hidden"] == []

    def test_missing_pack_flag_exits_2(self, tmp_path, capsys, monkeypatch):
        monkeypatch.delenv("COMPZSL_PACK_DIR", raising=False)
        code = main(["train", "--out", str(tmp_path / "m"), *SMALL_TRAIN])
        assert code == 2
        assert "COMPZSL_PACK_DIR" in capsys.readouterr().err


class TestEval:
    def test_both_metrics_print_table_and_json(self, workdir, capsys):
        code = main(["eval", "--pack", str(workdir / "pack"),
                     "--model", str(workdir / "model")])
        assert code == 0
        out = capsys.readouterr().out
        assert "closed top-1" in out and "open top-1" in out and "h-mean" in out
        report = json.loads(out.strip().splitlines()[-1])
        assert report["test_images"] == 16
        assert report["closed_candidates"] == 4
        assert report["open_candidates"] == 12

    def test_single_metric_prints_one_line(self, workdir, capsys):
        code = main(["eval", "--pack", str(workdir / "pack"),
                     "--model", str(workdir / "model"), "--metric", "closed"])
        assert code == 0
        out = capsys.readouterr().out
        assert "closed top-1" in out and "open top-1" not in out

    def test_dimension_mismatch_exits_4(self, workdir, tmp_path, capsys):
        wide = tmp_path / "wide"
        assert main(["gen-synth", "--out", str(wide), "--attrs", "4",
                     "--objs", "4", "--seen", "8", "--unseen", "4",
                     "--per-comp", "2", "--visual-dim", "12",
                     "--embed-dim", "6", "--seed", "3"]) == 0
        code = main(["eval", "--pack", str(wide),
                     "--model", str(workdir / "model")])
        assert code == 4
        assert "error:" in capsys.readouterr().err


class TestRetrieve:
    def test_topk_lines(self, workdir, capsys):
        code = main(["retrieve", "--pack", str(workdir / "pack"),
                     "--model", str(workdir / "model"),
                     "--query", "attr0:obj1", "--topk", "5"])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 5
        for line in lines:
            image_id, dist = line.split("\t")
            float(dist)
            assert image_id

    def test_multi_attribute_query_parses(self):
        assert parse_query("red,shiny:car") == (["red", "shiny"], "car")
        assert parse_query(" red , shiny : car ") == (["red", "shiny"], "car")

    @pytest.mark.parametrize("query", ["redcar", "red:car:x", ":car", "red:"])
    def test_malformed_query_rejected(self, query):
        with pytest.raises(ConfigError):
            parse_query(query)

    def test_malformed_query_exits_2(self, workdir, capsys):
        code = main(["retrieve", "--pack", str(workdir / "pack"),
                     "--model", str(workdir / "model"), "--query", "redcar"])
        assert code == 2

    def test_unknown_attribute_exits_3(self, workdir, capsys):
        code = main(["retrieve", "--pack", str(workdir / "pack"),
                     "--model", str(workdir / "model"), "--query", "zzz:obj0"])
        assert code == 3
        assert "unknown attribute" in capsys.readouterr().err


class TestGradcheck:
    def test_passes_at_default_tolerance(self, workdir, capsys):
        code = main(["gradcheck", "--pack", str(workdir / "pack"),
                     *SMALL_TRAIN, "--batch", "4", "--max-entries", "60"])
        assert code == 0
        assert "grad_check pass" in capsys.readouterr().out

    def test_impossible_tolerance_exits_5(self, workdir, capsys):
        code = main(["gradcheck", "--pack", str(workdir / "pack"),
                     *SMALL_TRAIN, "--batch", "4", "--max-entries", "60",
                     "--tol", "1e-18"])
        assert code == 5
        captured = capsys.readouterr()
        assert "grad_check FAIL" in captured.out
        assert "error:" in captured.err


class TestStatsAndEnv:
    def test_stats_prints_counts(self, workdir, capsys):
        assert main(["stats", "--pack", str(workdir / "pack")]) == 0
        out = capsys.readouterr().out
        assert "images" in out and "48" in out

    def test_env_var_supplies_pack(self, workdir, capsys, monkeypatch):
        monkeypatch.setenv("COMPZSL_PACK_DIR", str(workdir / "pack"))
        assert main(["stats"]) == 0
        assert "images" in capsys.readouterr().out

    def test_flag_beats_env(self, workdir, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("COMPZSL_PACK_DIR", str(tmp_path / "nowhere"))
        assert main(["stats", "--pack", str(workdir / "pack")]) == 0

    def test_missing_pack_dir_exits_3(self, tmp_path, capsys):
        code = main(["stats", "--pack", str(tmp_path / "absent")])
        assert code == 3
