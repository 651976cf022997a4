"""
열역학 데이터베이스 테스트
"""

import json

import pytest

from config import settings
from src.engine.errors import ConfigError
from src.engine.thermo import DEFAULT_DATA_DIR, ThermoDB, data_dir


@pytest.mark.unit
class TestThermoDB:
    def test_default_file_loads(self, monkeypatch):
        """기본 data/thermo_db.json 로드"""
        monkeypatch.delenv(settings.DATA_DIR_ENV, raising=False)
        assert data_dir() == DEFAULT_DATA_DIR
        db = ThermoDB.load()
        assert db.formation("H2O") == pytest.approx(-285.83)

    def test_reaction_from_formation_enthalpies(self):
        """dH 가 없으면 생성물 - 반응물 (AgIO3 침전 = -55.4 kJ/mol)"""
        db = ThermoDB.load(DEFAULT_DATA_DIR)
        assert db.reaction("agio3_precipitation") == pytest.approx(-55.4, abs=1e-9)
        assert db.reaction("neutralization") == pytest.approx(-55.89)

    def test_missing_entries(self):
        db = ThermoDB.load(DEFAULT_DATA_DIR)
        with pytest.raises(ConfigError):
            db.formation("unobtainium")
        with pytest.raises(ConfigError):
            db.reaction("cold_fusion")
        with pytest.raises(ConfigError):
            db.require(["H+", "Xe"])

    def test_input_formation_heat(self):
        db = ThermoDB({"A": -10.0, "B": 5.0})
        assert db.input_formation_heat({"A": 2.0, "B": 1.0}) == pytest.approx(-15.0)

    def test_env_override(self, tmp_path, monkeypatch):
        """CHEMAUTOMATA_DATA_DIR 가 데이터 디렉터리를 바꾼다"""
        raw = {"schema_version": 1, "formation_kJ_per_mol": {"X": 1.5}, "reactions": {}}
        (tmp_path / "thermo_db.json").write_text(json.dumps(raw), encoding="utf-8")
        monkeypatch.setenv(settings.DATA_DIR_ENV, str(tmp_path))
        assert ThermoDB.load().formation("X") == 1.5

    def test_missing_or_broken_file(self, tmp_path):
        with pytest.raises(ConfigError):
            ThermoDB.load(str(tmp_path))
        (tmp_path / "thermo_db.json").write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            ThermoDB.load(str(tmp_path))

    def test_schema_version_mismatch(self):
        with pytest.raises(ConfigError):
            ThermoDB.from_dict({"schema_version": 99})
