"""
locus 지도 테스트
"""

import pytest

from src.analysis.locus import LOCUS_HEADER, locus_map, point_from_manifest, write_locus
from src.engine.chem_tm import TMCalibration

RUNS = [
    {"word": "abc", "frequency_Hz": 0.020, "amplitude_diff_V": 0.010, "area_Vs": 100.0, "verdict": "Accept"},
    {"word": "aabbcc", "frequency_Hz": 0.021, "amplitude_diff_V": 0.012, "area_Vs": 101.0, "verdict": "Accept"},
    {"word": "aaabbcc", "frequency_Hz": 0.018, "amplitude_diff_V": 0.020, "area_Vs": 120.0, "verdict": "Reject(ExcessA)"},
    {"word": "aabbccc", "frequency_Hz": 0.025, "amplitude_diff_V": -0.004, "area_Vs": 85.0, "verdict": "Reject(ExcessC)"},
]


@pytest.mark.unit
class TestLocusMap:
    def test_requires_two_runs(self):
        with pytest.raises(ValueError):
            locus_map(RUNS[:1])

    def test_sides_follow_band(self):
        points = locus_map(RUNS, TMCalibration(100.0, 3.0))
        assert [p.side for p in points] == ["on", "on", "above", "below"]
        assert [p.word for p in points] == ["abc", "aabbcc", "aaabbcc", "aabbccc"]

    def test_without_calibration(self):
        points = locus_map(RUNS)
        assert all(p.side == "" for p in points)

    def test_point_from_manifest(self):
        manifest = {
            "word": "aaabbcc",
            "verdict": {"outcome": "Reject", "reject_kind": "ExcessA"},
            "metrics": {"frequency_Hz": 0.02, "amplitude_diff_V": 0.01, "area_Vs": 120.0},
        }
        record = point_from_manifest(manifest)
        assert record["verdict"] == "Reject(ExcessA)"
        assert record["area_Vs"] == 120.0


@pytest.mark.unit
def test_write_locus_outputs(tmp_path):
    """CSV 행 수 = 점 수, SVG 는 같은 입력이면 같은 바이트"""
    calib = TMCalibration(100.0, 3.0)
    points = locus_map(RUNS, calib)
    csv_path = tmp_path / "locus.csv"
    n = write_locus(points, str(csv_path), str(tmp_path / "a.svg"), calib)
    assert n == len(RUNS)
    lines = csv_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(LOCUS_HEADER)
    assert len(lines) == len(RUNS) + 1
    write_locus(points, str(tmp_path / "again.csv"), str(tmp_path / "b.svg"), calib)
    first = (tmp_path / "a.svg").read_bytes()
    assert first.startswith(b"<?xml")
    assert first == (tmp_path / "b.svg").read_bytes()


@pytest.mark.unit
def test_empty_band_omits_overlay(tmp_path, caplog):
    points = locus_map(RUNS)
    write_locus(points, str(tmp_path / "l.csv"), str(tmp_path / "l.svg"), TMCalibration(100.0, 0.0))
    assert (tmp_path / "l.svg").exists()
    assert "오버레이" in caplog.text
