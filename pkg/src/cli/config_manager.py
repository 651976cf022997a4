"""
실행 설정 / 레시피 / 보정값 로드 및 검증기

- 실행 설정: TOML (schema_version = 1, 단위 접미사 키: tau_s, sample_dt_s ...)
- 레시피: TOML 또는 JSON ([aliquots."a"] volume_dm3, amount_mol 또는 conc_M)
- 보정값: tune 결과 JSON (calibration 키) 또는 보정값 JSON 자체
- 검증: validate_config(dict) -> (ok, errors)

한국어 주석 포함.
"""
from __future__ import annotations

import json
import logging
import os
import sys
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config import settings
from src.automata.formal import Language, Word
from src.engine.chem_tm import TMCalibration
from src.engine.errors import ConfigError, WordError
from src.engine.integrator import RTOL_MAX, RTOL_MIN
from src.engine.reactor import AliquotEntry, AliquotRecipe

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

logger = logging.getLogger(__name__)


class RunConfig(BaseModel):
    """run / suite / tune 공통 실행 설정"""

    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = settings.SCHEMA_VERSION
    language: Language
    word: str = ""
    recipe_path: Optional[str] = None
    calibration_path: Optional[str] = None
    tau_s: float = Field(default=settings.TAU_S, gt=settings.TRANSIENT_DISCARD_S)
    sample_dt_s: Optional[float] = Field(default=None, gt=0.0)
    rtol: float = Field(default=settings.RTOL, ge=RTOL_MIN, le=RTOL_MAX)
    output_dir: str = "out"
    seed: int = 0
    max_len: Optional[int] = Field(default=None, ge=0)
    jobs: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_word(self) -> "RunConfig":
        try:
            Word.parse(self.word, self.language)
        except WordError as e:
            raise ValueError(str(e)) from None
        if self.sample_dt_s is not None and self.sample_dt_s > self.tau_s:
            raise ValueError(f"sample_dt_s({self.sample_dt_s}) 가 tau_s({self.tau_s}) 보다 큽니다")
        return self

    @property
    def parsed_word(self) -> Word:
        return Word.parse(self.word, self.language)


class AliquotSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    volume_dm3: float = Field(gt=0.0)
    inert: bool = False
    amount_mol: Dict[str, float] = Field(default_factory=dict)
    conc_M: Dict[str, float] = Field(default_factory=dict)

    @field_validator("amount_mol", "conc_M")
    @classmethod
    def _nonnegative(cls, value: Dict[str, float]) -> Dict[str, float]:
        for species, amount in value.items():
            if amount < 0.0:
                raise ValueError(f"음수 양: {species}={amount}")
        return value

    def amounts(self) -> Dict[str, float]:
        out = dict(self.amount_mol)
        for species, conc in self.conc_M.items():
            out[species] = out.get(species, 0.0) + conc * self.volume_dm3
        return out


class RecipeFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = settings.SCHEMA_VERSION
    recipe_id: str = "custom"
    language: Language
    aliquots: Dict[str, AliquotSpec]

    @model_validator(mode="after")
    def _check_symbols(self) -> "RecipeFile":
        allowed = {s.value for s in self.language.alphabet} | {"#"}
        unknown = sorted(set(self.aliquots) - allowed)
        if unknown:
            raise ValueError(f"{self.language.value} 레시피에 허용되지 않는 기호: {unknown}")
        return self

    def to_recipe(self) -> AliquotRecipe:
        from src.automata.formal import Symbol

        lookup = {s.value: s for s in Symbol}
        entries = {
            lookup[key]: AliquotEntry(spec.amounts(), spec.volume_dm3, spec.inert)
            for key, spec in self.aliquots.items()
        }
        return AliquotRecipe(self.recipe_id, self.language, entries)


def _format_errors(err: ValidationError) -> List[str]:
    messages = []
    for item in err.errors():
        loc = ".".join(str(x) for x in item.get("loc", ())) or "(설정)"
        messages.append(f"{loc}: {item.get('msg')}")
    return messages


def validate_config(cfg: Mapping[str, Any]) -> Tuple[bool, List[str]]:
    """실행 설정 딕셔너리를 검증하고 (ok, errors) 를 반환한다."""
    try:
        RunConfig.model_validate(dict(cfg))
    except ValidationError as e:
        return False, _format_errors(e)
    return True, []


def load_toml(path: str) -> Dict[str, Any]:
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"설정 파일이 없습니다: {path}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"TOML 파싱 실패: {path}: {e}") from None


def build_run_config(file_path: Optional[str] = None, **overrides: Any) -> RunConfig:
    """파일 값 위에 None 이 아닌 CLI 값을 덮어써서 RunConfig 를 만든다.

    Raises:
        ConfigError: 검증 실패 (메시지에 모든 오류 포함)
    """
    cfg: Dict[str, Any] = load_toml(file_path) if file_path else {}
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    ok, errors = validate_config(cfg)
    if not ok:
        raise ConfigError("설정 검증 실패: " + "; ".join(errors))
    return RunConfig.model_validate(cfg)


def _load_mapping(path: str) -> Dict[str, Any]:
    if path.endswith(".toml"):
        return load_toml(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"파일이 없습니다: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"JSON 파싱 실패: {path}: {e}") from None


def load_recipe(path: str, language: Optional[Language] = None) -> AliquotRecipe:
    """레시피 파일 로드. tune 결과 JSON 이면 recipe 키를 사용한다.

    Raises:
        ConfigError: 형식 오류 또는 언어 불일치
    """
    raw = _load_mapping(path)
    if "recipe" in raw and isinstance(raw["recipe"], dict):
        raw = raw["recipe"]
    if "aliquots" in raw:
        # AliquotRecipe.to_dict 형식에는 schema_version 이 없을 수 있음
        raw = {"schema_version": settings.SCHEMA_VERSION, **raw}
    try:
        recipe = RecipeFile.model_validate(raw).to_recipe()
    except ValidationError as e:
        raise ConfigError(f"레시피 검증 실패 ({path}): " + "; ".join(_format_errors(e))) from None
    if language is not None and recipe.language is not language:
        raise ConfigError(f"레시피 언어({recipe.language.value}) 가 {language.value} 와 다릅니다")
    logger.debug(f"레시피 로드: {path} ({recipe.recipe_id})")
    return recipe


def load_calibration(path: str) -> TMCalibration:
    raw = _load_mapping(path)
    if "calibration" in raw and isinstance(raw["calibration"], dict):
        raw = raw["calibration"]
    return TMCalibration.from_dict(raw)


def ensure_output_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
