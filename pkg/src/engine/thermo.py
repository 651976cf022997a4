"""
열역학 데이터베이스 (ThermoDB)

- 파일: <데이터 디렉터리>/thermo_db.json
- 데이터 디렉터리: 환경변수 CHEMAUTOMATA_DATA_DIR 가 있으면 그 경로, 없으면 <repo>/data
- 생성 엔탈피 dHf (kJ/mol) 와 반응 엔탈피 dHr (kJ/mol)

반응 엔탈피가 직접 주어지지 않으면 생성 엔탈피로 계산한다 (Hess 법칙).
한국어 주석 포함.
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Mapping, Optional

from config import settings
from src.engine.errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(__file__))), "data")
DB_FILENAME = "thermo_db.json"


def data_dir() -> str:
    """현재 유효한 열역학 데이터 디렉터리"""
    return os.environ.get(settings.DATA_DIR_ENV) or DEFAULT_DATA_DIR


@dataclass(frozen=True)
class ThermoDB:
    formation_kJ_per_mol: Mapping[str, float]
    reactions: Mapping[str, Mapping[str, Any]] = field(default_factory=dict)

    @classmethod
    def load(cls, directory: Optional[str] = None) -> "ThermoDB":
        path = os.path.join(directory or data_dir(), DB_FILENAME)
        try:
            with open(path, "r", encoding="utf-8") as f:
                raw = json.load(f)
        except FileNotFoundError:
            raise ConfigError(f"열역학 데이터 파일이 없습니다: {path}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"열역학 데이터 파싱 실패: {path}: {e}") from None
        logger.debug(f"열역학 데이터 로드: {path}")
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "ThermoDB":
        version = raw.get("schema_version", settings.SCHEMA_VERSION)
        if version != settings.SCHEMA_VERSION:
            raise ConfigError(f"열역학 데이터 스키마 버전 불일치: {version}")
        formation = {k: float(v) for k, v in raw.get("formation_kJ_per_mol", {}).items()}
        return cls(formation, dict(raw.get("reactions", {})))

    def formation(self, species: str) -> float:
        try:
            return self.formation_kJ_per_mol[species]
        except KeyError:
            raise ConfigError(f"생성 엔탈피 항목이 없습니다: {species}") from None

    def reaction(self, name: str) -> float:
        """반응 엔탈피 dHr (kJ/mol). dH 가 없으면 sum(nu dHf, 생성물) - sum(nu dHf, 반응물)."""
        try:
            entry = self.reactions[name]
        except KeyError:
            raise ConfigError(f"반응 항목이 없습니다: {name}") from None
        if "dH_kJ_per_mol" in entry:
            return float(entry["dH_kJ_per_mol"])
        products = sum(nu * self.formation(s) for s, nu in entry.get("products", {}).items())
        reactants = sum(nu * self.formation(s) for s, nu in entry.get("reactants", {}).items())
        return products - reactants

    def input_formation_heat(self, moles: Mapping[str, float]) -> float:
        """sum_j n_j * dHf_j (kJ)"""
        return sum(n * self.formation(species) for species, n in moles.items())

    def require(self, species: Iterable[str]) -> None:
        missing = sorted(s for s in species if s not in self.formation_kJ_per_mol)
        if missing:
            raise ConfigError(f"생성 엔탈피 항목 누락: {', '.join(missing)}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": settings.SCHEMA_VERSION,
            "formation_kJ_per_mol": dict(sorted(self.formation_kJ_per_mol.items())),
            "reactions": dict(sorted(self.reactions.items())),
        }
