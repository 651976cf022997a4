"""
명령줄 인터페이스 테스트 (종료 코드, stdout JSON, 출력 파일)
"""

import json

import pytest

from src.cli import app
from src.cli.app import dispatch
from src.engine.chem_tm import TMCalibration
from src.engine.errors import SimulationError


def _stdout_json(capsys):
    return json.loads(capsys.readouterr().out)


@pytest.mark.smoke
class TestOracleCommand:
    def test_accept(self, capsys):
        assert dispatch(["oracle", "--lang", "L3", "--word", "abc"]) == 0
        out = _stdout_json(capsys)
        assert out["verdict"] == {"outcome": "Accept", "reject_kind": None}

    def test_reject_kind(self, capsys):
        assert dispatch(["oracle", "--lang", "L2", "--word", "())"]) == 0
        assert _stdout_json(capsys)["verdict"]["reject_kind"] == "PopEmptyStack"

    def test_foreign_symbol_is_usage_error(self, capsys):
        assert dispatch(["oracle", "--lang", "L1", "--word", "abc"]) == 1
        assert "WordError" in capsys.readouterr().err

    def test_unknown_option(self):
        assert dispatch(["oracle", "--colour", "red"]) == 1

    def test_help(self, capsys):
        assert dispatch(["--help"]) == 0
        assert "suite" in capsys.readouterr().out


@pytest.mark.smoke
class TestRunCommand:
    def test_run_l1_writes_outputs(self, tmp_path, capsys):
        assert dispatch(["run", "--lang", "L1", "--word", "aab", "--out", str(tmp_path)]) == 0
        manifest = _stdout_json(capsys)
        assert manifest["verdict"]["outcome"] == "Accept"
        assert manifest["oracle"] == manifest["verdict"]
        assert "runtime_s" not in manifest
        assert (tmp_path / "L1_aab_trajectory.csv").exists()
        saved = json.loads((tmp_path / "L1_aab_verdict.json").read_text(encoding="utf-8"))
        assert saved == manifest

    def test_run_l2_includes_yield(self, tmp_path, capsys):
        assert dispatch(["run", "--lang", "L2", "--word", "(())", "--out", str(tmp_path), "--timing"]) == 0
        manifest = _stdout_json(capsys)
        assert manifest["metrics"]["yield"]["n_pairs"] == 2
        assert manifest["runtime_s"] >= 0.0
        assert len(manifest["metrics"]["symbol_costs"]) == 5

    def test_run_from_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "run.toml"
        cfg.write_text(
            f'schema_version = 1\nlanguage = "L1"\nword = "bb"\noutput_dir = "{tmp_path.as_posix()}"\n',
            encoding="utf-8",
        )
        assert dispatch(["run", "--config", str(cfg)]) == 0
        assert _stdout_json(capsys)["verdict"]["reject_kind"] == "NoReaction"

    def test_l3_requires_calibration(self, tmp_path, capsys):
        assert dispatch(["run", "--lang", "L3", "--word", "abc", "--out", str(tmp_path)]) == 1
        assert "calibration" in capsys.readouterr().err

    def test_invalid_settings(self, tmp_path):
        assert dispatch(["run", "--word", "ab", "--out", str(tmp_path)]) == 1
        assert dispatch(["run", "--lang", "L1", "--rtol", "0.1", "--out", str(tmp_path)]) == 1
        assert dispatch(["run", "--lang", "L1", "--word", "ab", "--tau-s", "10"]) == 1

    def test_simulation_failure_exit_code(self, tmp_path, monkeypatch, capsys):
        def boom(*args, **kwargs):
            raise SimulationError("적분 실패: 테스트")

        monkeypatch.setattr(app, "run_single", boom)
        assert dispatch(["run", "--lang", "L1", "--word", "ab", "--out", str(tmp_path)]) == 2
        assert "SimulationError" in capsys.readouterr().err


@pytest.mark.integration
class TestSuiteCommand:
    def test_suite_report_is_reproducible(self, tmp_path, capsys):
        """같은 입력이면 보고서 바이트가 같다"""
        out1, out2 = tmp_path / "one", tmp_path / "two"
        assert dispatch(["suite", "--lang", "L1", "--max-len", "3", "--out", str(out1)]) == 0
        summary = _stdout_json(capsys)
        assert summary["word_count"] == 14
        assert summary["mismatch_count"] == 0
        assert dispatch(["suite", "--lang", "L1", "--max-len", "3", "--out", str(out2), "--jobs", "2"]) == 0
        capsys.readouterr()
        for name in ("L1_suite.csv", "L1_suite.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        lines = (out1 / "L1_suite.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "word,oracle,chemical,match"
        assert len(lines) == 15


@pytest.mark.unit
class TestTuneAndMapArguments:
    def test_tune_rejects_bad_n_range(self, tmp_path):
        assert dispatch(["tune", "--n-range", "1,9", "--out", str(tmp_path)]) == 1
        assert dispatch(["tune", "--n-range", "x", "--out", str(tmp_path)]) == 1
        assert dispatch(["tune", "--budget", "0", "--out", str(tmp_path)]) == 1

    def test_map_needs_two_runs(self, tmp_path):
        run = tmp_path / "L3_abc_verdict.json"
        run.write_text("{}", encoding="utf-8")
        assert dispatch(["map", str(run), "--out", str(tmp_path)]) == 1

    def test_map_from_manifests(self, tmp_path, capsys):
        runs = tmp_path / "runs"
        runs.mkdir()
        for word, area, kind in (("abc", 100.0, None), ("aabbcc", 101.0, None), ("aaabbcc", 130.0, "ExcessA")):
            manifest = {
                "language": "L3",
                "word": word,
                "verdict": {"outcome": "Reject" if kind else "Accept", "reject_kind": kind},
                "metrics": {"frequency_Hz": 0.02, "amplitude_diff_V": area / 1e4, "area_Vs": area},
            }
            (runs / f"L3_{word}_verdict.json").write_text(json.dumps(manifest), encoding="utf-8")
        calib = tmp_path / "calibration.json"
        calib.write_text(json.dumps(TMCalibration(100.0, 5.0).to_dict()), encoding="utf-8")

        out = tmp_path / "map"
        assert dispatch(["map", str(runs), "--calibration", str(calib), "--out", str(out)]) == 0
        assert _stdout_json(capsys)["points"] == 3
        lines = (out / "locus.csv").read_text(encoding="utf-8").splitlines()
        # 파일 이름순: aaabbcc, aabbcc, abc
        assert lines[1].endswith(",above")
        assert lines[2].endswith(",on") and lines[3].endswith(",on")
        assert (out / "locus.svg").exists()

    def test_map_rejects_other_languages(self, tmp_path):
        for word in ("ab", "ba"):
            (tmp_path / f"L1_{word}_verdict.json").write_text(
                json.dumps({"language": "L1", "word": word}), encoding="utf-8"
            )
        assert dispatch(["map", str(tmp_path), "--out", str(tmp_path / "m")]) == 1
