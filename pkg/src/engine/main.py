"""
단어 실행 진입점

- 언어별 기본 모델 / 레시피 / 초기 혼합물 구성
- 단어 하나를 반응기에서 실행하고 판정과 요약(manifest) 생성
- 기호별 열역학 비용 (방출열, L3 는 면적) 포함

한국어 주석 및 간단한 실행용 API 제공
"""
from __future__ import annotations

import logging
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import click

from config import settings
from src.automata.formal import Language, Verdict, Word, recognize
from src.engine.chem_fa import PrecipitationModel, default_fa_initial, default_fa_recipe
from src.engine.chem_pda import AcidBaseModel, default_pda_initial, default_pda_recipe, yield_report
from src.engine.chem_tm import BZModel, TMCalibration, default_tm_initial, default_tm_recipe
from src.engine.errors import ConfigError, UndefinedYieldError, WordError
from src.engine.integrator import Tolerances
from src.engine.reactor import (
    AliquotRecipe,
    ChemistryModel,
    FeedSchedule,
    Mixture,
    Trajectory,
    run_word,
    symbol_heat_costs,
)
from src.engine.outputs.json_writer import dumps, read_json
from src.engine.redox import symbol_area_costs
from src.engine.thermo import ThermoDB

logger = logging.getLogger(__name__)


def build_model(
    language: Language,
    db: Optional[ThermoDB] = None,
    calibration: Optional[TMCalibration] = None,
    tolerances: Optional[Tolerances] = None,
) -> ChemistryModel:
    """언어에 맞는 화학 모델 (반응 엔탈피는 ThermoDB 에서)"""
    db = db or ThermoDB.load()
    if language is Language.L1:
        return PrecipitationModel.from_thermo(db)
    if language is Language.L2:
        return AcidBaseModel.from_thermo(db)
    return BZModel.from_thermo(db, tolerances=tolerances or Tolerances(), calibration=calibration)


def default_recipe(language: Language) -> AliquotRecipe:
    return {
        Language.L1: default_fa_recipe,
        Language.L2: default_pda_recipe,
        Language.L3: default_tm_recipe,
    }[language]()


def default_initial(language: Language) -> Mixture:
    return {
        Language.L1: default_fa_initial,
        Language.L2: default_pda_initial,
        Language.L3: default_tm_initial,
    }[language]()


@dataclass
class RunResult:
    language: Language
    word: Word
    recipe: AliquotRecipe
    schedule: FeedSchedule
    trajectory: Trajectory
    verdict: Verdict
    metrics: Dict[str, Any] = field(default_factory=dict)
    runtime_s: float = 0.0

    @property
    def oracle(self) -> Verdict:
        return recognize(self.language, self.word)

    def manifest(self, seed: int = 0, timing: bool = False) -> Dict[str, Any]:
        """실행 manifest {language, word, recipe_id, seed, verdict, ...}"""
        out = {
            "schema_version": settings.SCHEMA_VERSION,
            "language": self.language.value,
            "word": str(self.word),
            "recipe_id": self.recipe.recipe_id,
            "seed": seed,
            "tau_s": self.schedule.interval_s,
            "verdict": self.verdict.to_dict(),
            "oracle": self.oracle.to_dict(),
            "metrics": self.metrics,
        }
        if timing:
            out["runtime_s"] = self.runtime_s
        return out


def _symbol_costs(model: ChemistryModel, traj: Trajectory, schedule: FeedSchedule) -> list:
    heats = symbol_heat_costs(traj)
    costs = [{"symbol": s.value, "heat_kJ": h} for s, h in heats]
    if isinstance(model, BZModel):
        areas = symbol_area_costs(traj, schedule, model.redox(traj.final))
        for entry, (_, area) in zip(costs, areas):
            entry["area_Vs"] = area
    return costs


def run_single(
    language: Language,
    word: Word,
    model: Optional[ChemistryModel] = None,
    recipe: Optional[AliquotRecipe] = None,
    initial: Optional[Mixture] = None,
    schedule: Optional[FeedSchedule] = None,
    db: Optional[ThermoDB] = None,
) -> RunResult:
    """단어 하나를 실행하고 판정, 요약 지표, 기호별 비용을 모은다."""
    db = db or ThermoDB.load()
    model = model or build_model(language, db)
    recipe = recipe or default_recipe(language)
    initial = initial or default_initial(language)
    schedule = schedule or FeedSchedule(word)

    start = time.perf_counter()
    traj, verdict = run_word(model, recipe, schedule, initial)
    metrics: Dict[str, Any] = dict(model.describe(traj, schedule))
    metrics["symbol_costs"] = _symbol_costs(model, traj, schedule)
    if isinstance(model, AcidBaseModel):
        try:
            metrics["yield"] = yield_report(traj, word, recipe, db, model)
        except UndefinedYieldError as e:
            logger.warning(f"엔탈피 수율 계산 불가: {e}")
            metrics["yield"] = None
    runtime = time.perf_counter() - start
    logger.debug(f"'{word}' 실행 시간 {runtime:.3f}s")
    return RunResult(language, word, recipe, schedule, traj, verdict, metrics, runtime)


def setup_logging(verbose: bool = False) -> None:
    """stderr 로깅 (INFO, verbose 이면 DEBUG). stdout 은 JSON 전용."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=settings.LOG_FORMAT,
        stream=sys.stderr,
    )


@click.command(name="run-word")
@click.argument("language", type=click.Choice([lang.value for lang in Language]))
@click.argument("word", default="")
@click.option("--calibration", "calibration_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--verbose", is_flag=True, default=False)
def main(language: str, word: str, calibration_path: Optional[str], verbose: bool) -> None:
    """기본 레시피로 단어 하나를 실행하고 manifest 를 stdout 에 쓴다 (python -m src.engine.main)"""
    setup_logging(verbose)
    lang = Language(language)
    try:
        calibration = TMCalibration.from_dict(read_json(calibration_path)) if calibration_path else None
        parsed = Word.parse(word, lang)
        result = run_single(lang, parsed, model=build_model(lang, calibration=calibration))
    except (ConfigError, WordError) as e:
        click.echo(f"오류({type(e).__name__}): {e}", err=True)
        sys.exit(1)
    logger.info(f"{lang.value} '{word}': {result.verdict.label()}")
    click.echo(dumps(result.manifest()), nl=False)


if __name__ == "__main__":
    main()
