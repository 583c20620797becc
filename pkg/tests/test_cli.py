import json
from pathlib import Path

import pytest

from opnav import study
from opnav.cli import main


@pytest.fixture()
def corpus_file(tmp_path):
    path = tmp_path / "corpus.xml"
    path.write_text(study.data_text("corpus.xml"), encoding="utf-8")
    return str(path)


def write_flat(path: Path, values):
    path.write_text("value\n" + "\n".join(str(v) for v in values) + "\n")
    return str(path)


class TestIndexCommand:
    def test_valid_corpus(self, corpus_file, capsys):
        assert main(["index", corpus_file]) == 0
        stats = json.loads(capsys.readouterr().out)
        assert stats["nodes"] == 50
        assert stats["indexed_docs"] == 50

    def test_invalid_corpus_exits_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.xml"
        bad.write_text('<node id="a"><related ref="ghost"/></node>')
        assert main(["index", str(bad)]) == 1
        assert "ghost" in capsys.readouterr().err

    def test_missing_file_exits_one(self):
        assert main(["index", "/nowhere.xml"]) == 1


class TestAskCommand:
    def test_one_shot_answer(self, corpus_file, capsys):
        assert main(["ask", corpus_file, "how do I check chuck pressure"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["answer"]["primary_node"] == "chuck-pressure"

    def test_empty_question_usage_error(self, corpus_file, capsys):
        with pytest.raises(SystemExit) as err:
            main(["ask", corpus_file, "   "])
        assert err.value.code == 2
        assert "usage" in capsys.readouterr().err.lower()

    def test_unknown_flag_usage_error(self, corpus_file):
        with pytest.raises(SystemExit) as err:
            main(["ask", corpus_file, "q", "--frobnicate"])
        assert err.value.code == 2


class TestAnalyzeCommands:
    def test_learning_outputs(self, tmp_path, capsys):
        dataset = tmp_path / "a.csv"
        dataset.write_text(study.data_text("traditional.csv"), encoding="utf-8")
        out = tmp_path / "out"
        assert main(["analyze", "learning", str(dataset), "--out", str(out)]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["doubling"]["mean_rate_pct"] == 91.85
        rates = (out / "learning_rates.csv").read_text()
        assert "2,27.05,97.0" in rates
        assert (out / "learning_curve.csv").exists()

    def test_mwu_flat_files_reference_line(self, tmp_path, capsys):
        a = write_flat(tmp_path / "a.csv", range(11, 21))
        b = write_flat(tmp_path / "b.csv", range(1, 11))
        assert main(["analyze", "mwu", a, b]) == 0
        line = capsys.readouterr().out.strip()
        assert line == "u=0 z=3.779645 p=0.000157 REJECT"

    def test_mwu_matrix_mode(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        a.write_text(study.data_text("traditional.csv"), encoding="utf-8")
        b = tmp_path / "b.csv"
        b.write_text(study.data_text("assisted.csv"), encoding="utf-8")
        out = tmp_path / "out"
        assert main(["analyze", "mwu", str(a), str(b), "--out", str(out)]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "level=1 u=3 z=3.552866 p=0.000381 REJECT"
        assert lines[1] == "level=2 u=0 z=3.779645 p=0.000157 REJECT"
        assert (out / "rank_tests.csv").exists()
        assert (out / "scatter_levels.csv").exists()

    def test_mwu_mixed_modes_rejected(self, tmp_path):
        a = write_flat(tmp_path / "a.csv", range(5))
        b = tmp_path / "b.csv"
        b.write_text(study.data_text("assisted.csv"), encoding="utf-8")
        assert main(["analyze", "mwu", a, str(b)]) == 1

    def test_learning_bad_dataset(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("nope\n1\n")
        assert main(["analyze", "learning", str(bad)]) == 1


class TestSimulateCommand:
    def test_deterministic_outputs(self, tmp_path):
        one, two = tmp_path / "one", tmp_path / "two"
        assert main(["simulate", "--seed", "42", "--out", str(one)]) == 0
        assert main(["simulate", "--seed", "42", "--out", str(two)]) == 0
        for name in ("traditional.csv", "assisted.csv", "metadata.json"):
            assert (one / name).read_bytes() == (two / name).read_bytes()

    def test_seed_changes_data(self, tmp_path):
        one, two = tmp_path / "one", tmp_path / "two"
        main(["simulate", "--seed", "1", "--out", str(one)])
        main(["simulate", "--seed", "2", "--out", str(two)])
        assert (one / "traditional.csv").read_text() != (two / "traditional.csv").read_text()

    def test_config_file(self, tmp_path):
        config = tmp_path / "sim.toml"
        config.write_text(
            "[simulate]\n"
            "operators_per_group = 3\n"
            "batches = 8\n"
            "noise_cv = 0.05\n"
            "[[simulate.group]]\n"
            'name = "only"\n'
            "b0 = 10.0\nb1 = 20.0\nb2 = 0.5\n",
            encoding="utf-8",
        )
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(config), "--seed", "9",
                     "--out", str(out)]) == 0
        lines = (out / "only.csv").read_text().strip().splitlines()
        assert len(lines) == 4  # header + 3 operators
        meta = json.loads((out / "metadata.json").read_text())
        assert meta["seed"] == 9


class TestReportCommand:
    def test_paper_tables_byte_stable(self, tmp_path):
        one, two = tmp_path / "one", tmp_path / "two"
        assert main(["report", "--paper-tables", "--out", str(one)]) == 0
        assert main(["report", "--paper-tables", "--out", str(two)]) == 0
        names = [p.name for p in sorted(one.iterdir())]
        assert names == [
            "learning_curves.csv", "learning_rates_assisted.csv",
            "learning_rates_traditional.csv", "rank_tests.csv",
            "scatter_levels.csv", "summary.json",
        ]
        for name in names:
            assert (one / name).read_bytes() == (two / name).read_bytes()

    def test_tables_carry_reference_figures(self, tmp_path):
        out = tmp_path / "golds"
        main(["report", "--paper-tables", "--out", str(out)])
        rates = (out / "learning_rates_traditional.csv").read_text()
        assert rates.strip().splitlines()[-1] == "mean,,91.85"
        rank = (out / "rank_tests.csv").read_text()
        assert "1,10,10,152,58,3,23,3.552866,0.000381,reject" in rank

    def test_report_without_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as err:
            main(["report"])
        assert err.value.code == 2
