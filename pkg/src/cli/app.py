"""
chemical-automata 명령줄 인터페이스 (click)

하위 명령:
- run    : 단어 하나 실행 -> 궤적 CSV + 판정 JSON
- suite  : 오라클 차분 테스트 -> 보고서 CSV / JSON (--jobs N)
- tune   : L3 레시피 튜닝 -> TuneResult JSON
- map    : run 결과 JSON 들로 locus CSV / SVG
- oracle : 형식 인식기 판정만

종료 코드: 0 성공, 1 사용법/설정 오류, 2 시뮬레이션/튜닝 실패.
stdout 에는 JSON 만, 로그와 진단은 stderr 로 보낸다.
"""
from __future__ import annotations

import glob
import logging
import os
import sys
from typing import List, Optional, Sequence

import click

from config import settings
from src.automata.formal import Language, Word, recognize
from src.cli.config_manager import (
    RunConfig,
    build_run_config,
    ensure_output_dir,
    load_calibration,
    load_recipe,
)
from src.engine.errors import (
    ConfigError,
    ConsistencyError,
    NumericalError,
    SimulationError,
    TuningError,
    WordError,
)
from src.engine.integrator import Tolerances
from src.engine.main import build_model, default_initial, default_recipe, run_single, setup_logging
from src.engine.outputs.csv_writer import write_rows, write_trajectory
from src.engine.outputs.json_writer import dumps, read_json, write_json
from src.engine.reactor import AliquotRecipe, FeedSchedule
from src.engine.thermo import ThermoDB

logger = logging.getLogger(__name__)

REPORT_HEADER = ("word", "oracle", "chemical", "match")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2

_LANG_CHOICE = click.Choice([lang.value for lang in Language])


def _word_label(word: Word) -> str:
    return str(word) or "empty"


def _recipe_for(cfg: RunConfig) -> AliquotRecipe:
    if cfg.recipe_path:
        return load_recipe(cfg.recipe_path, cfg.language)
    return default_recipe(cfg.language)


def _model_for(cfg: RunConfig, db: ThermoDB):
    calibration = load_calibration(cfg.calibration_path) if cfg.calibration_path else None
    if cfg.language is Language.L3 and calibration is None:
        raise ConfigError("L3 판정에는 --calibration (tune 결과 JSON) 이 필요합니다")
    return build_model(cfg.language, db, calibration=calibration, tolerances=Tolerances(cfg.rtol))


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="DEBUG 로그 출력")
def cli(verbose: bool) -> None:
    """화학 오토마타 시뮬레이터 (FA: 침전, PDA: 산-염기, TM: BZ 진동)"""
    setup_logging(verbose)


@cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="실행 설정 TOML")
@click.option("--lang", "language", type=_LANG_CHOICE)
@click.option("--word", type=str)
@click.option("--recipe", "recipe_path", type=click.Path(dir_okay=False))
@click.option("--calibration", "calibration_path", type=click.Path(dir_okay=False))
@click.option("--tau-s", type=float)
@click.option("--sample-dt-s", type=float)
@click.option("--rtol", type=float)
@click.option("--out", "output_dir", type=click.Path(file_okay=False))
@click.option("--seed", type=int)
@click.option("--timing", is_flag=True, help="판정 JSON 에 실행 시간 포함")
def run(config_path, language, word, recipe_path, calibration_path, tau_s, sample_dt_s, rtol, output_dir, seed, timing) -> int:
    """단어 하나를 실행하고 궤적 CSV 와 판정 JSON 을 기록한다."""
    cfg = build_run_config(
        config_path,
        language=language,
        word=word,
        recipe_path=recipe_path,
        calibration_path=calibration_path,
        tau_s=tau_s,
        sample_dt_s=sample_dt_s,
        rtol=rtol,
        output_dir=output_dir,
        seed=seed,
    )
    db = ThermoDB.load()
    model = _model_for(cfg, db)
    recipe = _recipe_for(cfg)
    word_obj = cfg.parsed_word
    schedule = FeedSchedule(word_obj, cfg.tau_s, sample_dt_s=cfg.sample_dt_s)

    logger.info(f"[{cfg.language.value}] '{word_obj}' 실행 시작 (tau={cfg.tau_s}s)")
    result = run_single(cfg.language, word_obj, model, recipe, default_initial(cfg.language), schedule, db)
    manifest = result.manifest(seed=cfg.seed, timing=timing)

    out_dir = ensure_output_dir(cfg.output_dir)
    stem = f"{cfg.language.value}_{_word_label(word_obj)}"
    n = write_trajectory(os.path.join(out_dir, f"{stem}_trajectory.csv"), result.trajectory)
    write_json(os.path.join(out_dir, f"{stem}_verdict.json"), manifest)
    logger.info(f"[{cfg.language.value}] '{word_obj}' -> {result.verdict.label()} (샘플 {n}개)")
    click.echo(dumps(manifest), nl=False)
    return EXIT_OK


@cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False))
@click.option("--lang", "language", type=_LANG_CHOICE)
@click.option("--max-len", type=int, help="단어 최대 길이 (L1 기본 8, L2 기본 10)")
@click.option("--recipe", "recipe_path", type=click.Path(dir_okay=False))
@click.option("--calibration", "calibration_path", type=click.Path(dir_okay=False))
@click.option("--tau-s", type=float)
@click.option("--rtol", type=float)
@click.option("--jobs", type=int, help="병렬 워커 수")
@click.option("--out", "output_dir", type=click.Path(file_okay=False))
@click.option("--seed", type=int)
@click.option("--timing", is_flag=True)
def suite(config_path, language, max_len, recipe_path, calibration_path, tau_s, rtol, jobs, output_dir, seed, timing) -> int:
    """열거된 모든 단어에 대해 화학 판정과 오라클을 비교한다."""
    from src.analysis.differential import differential_test

    cfg = build_run_config(
        config_path,
        language=language,
        max_len=max_len,
        recipe_path=recipe_path,
        calibration_path=calibration_path,
        tau_s=tau_s,
        rtol=rtol,
        jobs=jobs,
        output_dir=output_dir,
        seed=seed,
    )
    limit = cfg.max_len
    if limit is None and cfg.language is not Language.L3:
        limit = settings.SUITE_MAX_LEN[cfg.language.value]

    db = ThermoDB.load()
    report = differential_test(
        cfg.language,
        _model_for(cfg, db),
        _recipe_for(cfg),
        default_initial(cfg.language),
        max_len=limit,
        interval_s=cfg.tau_s,
        jobs=cfg.jobs,
    )

    out_dir = ensure_output_dir(cfg.output_dir)
    stem = f"{cfg.language.value}_suite"
    write_rows(os.path.join(out_dir, f"{stem}.csv"), REPORT_HEADER, report.csv_rows())
    summary = report.to_dict(timing=timing)
    summary["seed"] = cfg.seed
    write_json(os.path.join(out_dir, f"{stem}.json"), summary)
    click.echo(dumps(summary), nl=False)
    return EXIT_OK


def _parse_n_range(text: str) -> List[int]:
    try:
        values = sorted({int(x) for x in text.split(",") if x.strip()})
    except ValueError:
        raise click.BadParameter(f"정수 목록이 아닙니다: '{text}'", param_hint="--n-range") from None
    if not values:
        raise click.BadParameter("비어 있습니다", param_hint="--n-range")
    return values


@cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False))
@click.option("--n-range", default=",".join(str(n) for n in settings.TUNE_N_RANGE), show_default=True)
@click.option("--budget", type=int, default=settings.TUNE_BUDGET, show_default=True)
@click.option("--recipe", "recipe_path", type=click.Path(dir_okay=False))
@click.option("--tau-s", type=float)
@click.option("--rtol", type=float)
@click.option("--out", "output_dir", type=click.Path(file_okay=False))
@click.option("--seed", type=int)
def tune(config_path, n_range, budget, recipe_path, tau_s, rtol, output_dir, seed) -> int:
    """L3 레시피를 튜닝하고 수용 밴드와 reject 시그니처를 보정한다."""
    from src.analysis.tuning import tune_recipe

    cfg = build_run_config(
        config_path,
        language=Language.L3.value,
        recipe_path=recipe_path,
        tau_s=tau_s,
        rtol=rtol,
        output_dir=output_dir,
        seed=seed,
    )
    if budget < 1:
        raise click.BadParameter(f"1 이상이어야 합니다: {budget}", param_hint="--budget")
    n_values = _parse_n_range(n_range)
    if any(n < 1 or n > 5 for n in n_values):
        raise click.BadParameter(f"1..5 범위여야 합니다: {n_values}", param_hint="--n-range")

    model = build_model(Language.L3, ThermoDB.load(), tolerances=Tolerances(cfg.rtol))
    result = tune_recipe(
        model,
        n_range=n_values,
        initial_recipe=_recipe_for(cfg),
        budget=budget,
        seed=cfg.seed,
        initial=default_initial(Language.L3),
        interval_s=cfg.tau_s,
    )
    out_dir = ensure_output_dir(cfg.output_dir)
    payload = result.to_dict()
    write_json(os.path.join(out_dir, "tune_result.json"), payload)
    write_json(os.path.join(out_dir, "calibration.json"), payload["calibration"])
    click.echo(dumps(payload), nl=False)
    return EXIT_OK


def _collect_run_files(paths: Sequence[str]) -> List[str]:
    files: List[str] = []
    for path in paths:
        if os.path.isdir(path):
            files.extend(sorted(glob.glob(os.path.join(path, "*_verdict.json"))))
        else:
            files.append(path)
    return files


@cli.command(name="map")
@click.argument("runs", nargs=-1, type=click.Path(exists=True))
@click.option("--calibration", "calibration_path", type=click.Path(dir_okay=False))
@click.option("--out", "output_dir", type=click.Path(file_okay=False), default="out", show_default=True)
def map_cmd(runs, calibration_path, output_dir) -> int:
    """run 결과 JSON (또는 그 디렉터리) 로 진동수-진폭 locus 지도를 만든다."""
    from src.analysis.locus import locus_map, point_from_manifest, write_locus

    files = _collect_run_files(runs)
    if len(files) < 2:
        raise click.UsageError(f"run 결과가 2개 이상 필요합니다 (현재 {len(files)}개)")
    manifests = [read_json(path) for path in files]
    if any(m.get("language") != Language.L3.value for m in manifests):
        raise click.UsageError("locus 지도는 L3 run 결과만 사용할 수 있습니다")
    try:
        records = [point_from_manifest(m) for m in manifests]
    except KeyError as e:
        raise ConfigError(f"run 결과에 지표가 없습니다: {e}") from None

    calibration = load_calibration(calibration_path) if calibration_path else None
    points = locus_map(records, calibration)
    out_dir = ensure_output_dir(output_dir)
    n = write_locus(
        points,
        os.path.join(out_dir, "locus.csv"),
        os.path.join(out_dir, "locus.svg"),
        calibration,
    )
    click.echo(dumps({"points": n, "csv": "locus.csv", "svg": "locus.svg"}), nl=False)
    return EXIT_OK


@cli.command()
@click.option("--lang", "language", type=_LANG_CHOICE, required=True)
@click.option("--word", type=str, default="")
def oracle(language, word) -> int:
    """형식 인식기 판정만 출력한다."""
    lang = Language(language)
    verdict = recognize(lang, Word.parse(word, lang))
    click.echo(dumps({"language": lang.value, "word": word, "verdict": verdict.to_dict()}), nl=False)
    return EXIT_OK


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """인자 목록을 실행하고 종료 코드를 반환한다."""
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        result = cli.main(args=args, prog_name="chemautomata", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        click.echo("중단됨", err=True)
        return EXIT_USAGE
    except (SimulationError, TuningError, NumericalError, ConsistencyError) as e:
        click.echo(f"오류({type(e).__name__}): {e}", err=True)
        return EXIT_FAILURE
    except (ConfigError, WordError, ValueError, OSError) as e:
        click.echo(f"오류({type(e).__name__}): {e}", err=True)
        return EXIT_USAGE
    return EXIT_OK if result is None else int(result)


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
