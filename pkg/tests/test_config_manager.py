"""
실행 설정 / 레시피 / 보정값 로더 테스트
"""

import json

import pytest

from src.automata.formal import Language, Symbol
from src.cli.config_manager import (
    build_run_config,
    load_calibration,
    load_recipe,
    validate_config,
)
from src.engine.chem_pda import default_pda_recipe
from src.engine.chem_tm import TMCalibration
from src.engine.errors import ConfigError

RECIPE_TOML = """
schema_version = 1
recipe_id = "l1-half"
language = "L1"

[aliquots."a"]
volume_dm3 = 0.01
conc_M = { "K+" = 0.05, "IO3-" = 0.05 }

[aliquots."b"]
volume_dm3 = 0.01
amount_mol = { "Ag+" = 0.0005, "NO3-" = 0.0005 }

[aliquots."#"]
volume_dm3 = 0.01
inert = true
"""


@pytest.mark.unit
class TestValidateConfig:
    def test_valid(self):
        ok, errors = validate_config({"language": "L3", "word": "aabbcc", "tau_s": 300.0})
        assert ok and errors == []

    @pytest.mark.parametrize(
        "cfg",
        [
            {"language": "L9"},
            {"language": "L1", "word": "abc"},
            {"language": "L2", "rtol": 1e-2},
            {"language": "L2", "tau_s": 20.0},
            {"language": "L2", "jobs": 0},
            {"language": "L2", "colour": "red"},
            {"language": "L2", "schema_version": 2},
            {"language": "L2", "tau_s": 100.0, "sample_dt_s": 200.0},
        ],
    )
    def test_invalid(self, cfg):
        ok, errors = validate_config(cfg)
        assert not ok
        assert errors and all(isinstance(e, str) for e in errors)

    def test_build_merges_file_and_overrides(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text('schema_version = 1\nlanguage = "L2"\nword = "(())"\ntau_s = 200.0\n', encoding="utf-8")
        cfg = build_run_config(str(path), word="()", tau_s=None)
        assert cfg.language is Language.L2
        assert cfg.word == "()"
        assert cfg.tau_s == 200.0
        assert str(cfg.parsed_word) == "()"

    def test_build_reports_all_errors(self):
        with pytest.raises(ConfigError) as exc:
            build_run_config(None, language="L1", rtol=1.0)
        assert "rtol" in str(exc.value)

    def test_missing_or_broken_toml(self, tmp_path):
        with pytest.raises(ConfigError):
            build_run_config(str(tmp_path / "none.toml"))
        bad = tmp_path / "bad.toml"
        bad.write_text("language = ", encoding="utf-8")
        with pytest.raises(ConfigError):
            build_run_config(str(bad))


@pytest.mark.unit
class TestRecipeFiles:
    def test_toml_recipe(self, tmp_path):
        path = tmp_path / "recipe.toml"
        path.write_text(RECIPE_TOML, encoding="utf-8")
        recipe = load_recipe(str(path), Language.L1)
        assert recipe.recipe_id == "l1-half"
        assert recipe.entry(Symbol.A).amounts_mol["IO3-"] == pytest.approx(0.0005)
        assert recipe.entry(Symbol.B).amounts_mol["Ag+"] == pytest.approx(0.0005)
        assert recipe.entry(Symbol.END).inert

    def test_json_recipe_from_dict_form(self, tmp_path):
        path = tmp_path / "recipe.json"
        path.write_text(json.dumps({"recipe": default_pda_recipe().to_dict()}), encoding="utf-8")
        assert load_recipe(str(path), Language.L2) == default_pda_recipe()

    def test_language_mismatch(self, tmp_path):
        path = tmp_path / "recipe.toml"
        path.write_text(RECIPE_TOML, encoding="utf-8")
        with pytest.raises(ConfigError):
            load_recipe(str(path), Language.L3)

    def test_symbol_outside_alphabet(self, tmp_path):
        path = tmp_path / "recipe.toml"
        path.write_text(RECIPE_TOML.replace('aliquots."b"', 'aliquots."c"'), encoding="utf-8")
        with pytest.raises(ConfigError):
            load_recipe(str(path))

    def test_negative_amount(self, tmp_path):
        path = tmp_path / "recipe.toml"
        path.write_text(RECIPE_TOML.replace('"Ag+" = 0.0005', '"Ag+" = -0.0005'), encoding="utf-8")
        with pytest.raises(ConfigError):
            load_recipe(str(path))


@pytest.mark.unit
def test_load_calibration_from_tune_result(tmp_path):
    calib = TMCalibration(42.0, 1.5, "below")
    path = tmp_path / "tune_result.json"
    path.write_text(json.dumps({"calibration": calib.to_dict(), "objective": 0.01}), encoding="utf-8")
    assert load_calibration(str(path)) == calib
    with pytest.raises(ConfigError):
        load_calibration(str(tmp_path / "missing.json"))
