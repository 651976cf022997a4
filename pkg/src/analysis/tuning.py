"""
L3 레시피 튜닝 (일정 면적 수용 기준)

- 면적 spread J = (max - min) / mean, a^n b^n c^n (n in n_range) 의 면적 A_word
- 분리 패널티: n = 2 의 한 블록 +/-1 섭동 단어 면적이 수용 범위에 가까우면 목적함수에 더함
- 제약: 가장 긴 단어의 마지막 구간 진동수 > 0 (진동 영역 유지), 위반 시 패널티
- 탐색: a/b/c aliquot 몰수의 log 배율 공간에서 Nelder-Mead (scipy.optimize.minimize)
- 결과: 최적 레시피, 수용 밴드 (수용 범위와 reject 면적 사이 간격으로 결정), reject 시그니처 라이브러리

한국어 주석 포함.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from config import settings
from src.automata.formal import RejectKind, Symbol, Word, abc_word, recognize_l3
from src.engine.chem_tm import (
    BZModel,
    RejectSignature,
    TMCalibration,
    default_tm_initial,
    default_tm_recipe,
)
from src.engine.errors import ConsistencyError, SimulationError, TuningError
from src.engine.features import OscillationDescriptors
from src.engine.reactor import AliquotRecipe, FeedSchedule, Mixture, simulate

logger = logging.getLogger(__name__)

TUNED_SYMBOLS = (Symbol.A, Symbol.B, Symbol.C)
SIGNATURE_KINDS = (RejectKind.EXCESS_A, RejectKind.EXCESS_B, RejectKind.EXCESS_C)


class _BudgetExhausted(Exception):
    pass


@dataclass(frozen=True)
class Evaluation:
    objective: float
    feasible: bool
    areas: Dict[int, float] = field(default_factory=dict)
    frequency_hz: float = 0.0
    diagnostic: Optional[str] = None
    spread: Optional[float] = None
    reject_margin: Optional[float] = None


@dataclass(frozen=True)
class AcceptBand:
    center_Vs: float
    half_width_Vs: float
    margin_rel: Optional[float] = None  # reject 가 없으면 None

    @property
    def separated(self) -> bool:
        return self.margin_rel is None or self.margin_rel > 0.0


@dataclass(frozen=True)
class RejectSample:
    word: Word
    kind: RejectKind
    area_Vs: float
    descriptors: OscillationDescriptors


@dataclass
class TuneResult:
    recipe: AliquotRecipe
    calibration: TMCalibration
    objective: float
    initial_objective: float
    history: List[float]
    areas: Dict[int, float]
    scale_factors: Dict[str, float]
    seed: int
    evaluations: int
    spread: float = 0.0
    reject_margin: Optional[float] = None

    @property
    def separated(self) -> bool:
        return self.reject_margin is None or self.reject_margin > 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": settings.SCHEMA_VERSION,
            "recipe": self.recipe.to_dict(),
            "calibration": self.calibration.to_dict(),
            "objective": self.objective,
            "spread": self.spread,
            "reject_margin": self.reject_margin,
            "initial_objective": self.initial_objective,
            "history": list(self.history),
            "areas_Vs": {str(n): a for n, a in sorted(self.areas.items())},
            "scale_factors": dict(sorted(self.scale_factors.items())),
            "seed": self.seed,
            "evaluations": self.evaluations,
        }


def scaled_recipe(base: AliquotRecipe, log_factors: Sequence[float]) -> AliquotRecipe:
    recipe = base
    for symbol, theta in zip(TUNED_SYMBOLS, log_factors):
        recipe = recipe.scaled(symbol, math.exp(float(theta)))
    return recipe


def measure_word(
    model: BZModel, recipe: AliquotRecipe, initial: Mixture, word, interval_s: float
) -> Tuple[float, OscillationDescriptors]:
    schedule = FeedSchedule(word, interval_s)
    traj = simulate(model, recipe, schedule, initial)
    area, desc = model.measure(traj, schedule)
    return area.area_Vs, desc


def perturbation_words(n: int = 2, deltas: Sequence[int] = (-2, -1, 1, 2)) -> List[Tuple[Word, RejectKind]]:
    """n 블록 하나를 delta 만큼 바꾼 단어와 오라클 reject 종류"""
    out = []
    for block in range(3):
        for delta in deltas:
            counts = [n, n, n]
            counts[block] += delta
            if min(counts) < 0 or sum(counts) == 0:
                continue
            word = abc_word(*counts)
            verdict = recognize_l3(word)
            if verdict.reject_kind in SIGNATURE_KINDS:
                out.append((word, verdict.reject_kind))
    return out


def guard_words(n: int = 2) -> List[Word]:
    """탐색 중 분리 패널티에 쓰는 +/-1 섭동 단어"""
    return [w for w, _ in perturbation_words(n, (-1, 1))]


def reject_margin(accepted: Sequence[float], rejected: Sequence[float]) -> Optional[float]:
    """수용 범위 [min, max] 와 가장 가까운 reject 면적 사이 간격 / 수용 평균.

    범위 안에 들어온 reject 가 있으면 음수. reject 가 없으면 None.
    """
    if not rejected:
        return None
    lo, hi = min(accepted), max(accepted)
    mean = float(np.mean(accepted))
    gaps = []
    for r in rejected:
        if r < lo:
            gaps.append(lo - r)
        elif r > hi:
            gaps.append(r - hi)
        else:
            gaps.append(-min(r - lo, hi - r))
    return min(gaps) / abs(mean)


def accept_band(
    accepted: Sequence[float], rejected: Sequence[float] = (), pad_rel: float = settings.ACCEPT_BAND_PAD_REL
) -> AcceptBand:
    """수용 범위를 담고, 양쪽 경계는 가장 가까운 reject 까지의 중간점을 넘지 않는 밴드"""
    if not accepted:
        raise ValueError("수용 단어 면적이 없습니다")
    lo_a, hi_a = min(accepted), max(accepted)
    pad = abs(float(np.mean(accepted))) * pad_rel
    below = [r for r in rejected if r < lo_a]
    above = [r for r in rejected if r > hi_a]
    lo = max(lo_a - pad, 0.5 * (lo_a + max(below))) if below else lo_a - pad
    hi = min(hi_a + pad, 0.5 * (hi_a + min(above))) if above else hi_a + pad
    return AcceptBand(0.5 * (lo + hi), 0.5 * (hi - lo), reject_margin(accepted, rejected))


def spread_objective(
    model: BZModel,
    recipe: AliquotRecipe,
    initial: Mixture,
    n_range: Sequence[int] = settings.TUNE_N_RANGE,
    interval_s: float = settings.TAU_S,
) -> Evaluation:
    """면적 상대 spread. 진동이 끊기거나 적분이 실패하면 INFEASIBLE_PENALTY."""
    areas: Dict[int, float] = {}
    freq = 0.0
    try:
        for n in sorted(n_range):
            area, desc = measure_word(model, recipe, initial, abc_word(n, n, n), interval_s)
            areas[n] = area
            freq = desc.frequency_hz
    except (SimulationError, ConsistencyError) as e:
        return Evaluation(settings.INFEASIBLE_PENALTY, False, areas, 0.0, str(e))
    if not freq > 0.0:
        return Evaluation(settings.INFEASIBLE_PENALTY, False, areas, 0.0, "진동 소멸")
    values = np.array(list(areas.values()))
    mean = float(values.mean())
    if not mean > 0.0:
        return Evaluation(settings.INFEASIBLE_PENALTY, False, areas, freq, "면적 평균 0")
    spread = float((values.max() - values.min()) / mean)
    return Evaluation(spread, True, areas, freq, spread=spread)


def tuning_objective(
    model: BZModel,
    recipe: AliquotRecipe,
    initial: Mixture,
    n_range: Sequence[int] = settings.TUNE_N_RANGE,
    interval_s: float = settings.TAU_S,
    guards: Sequence[Word] = (),
) -> Evaluation:
    """J + w * max(0, 목표 간격 - reject 간격). guards 가 비어 있으면 J 만 사용한다."""
    ev = spread_objective(model, recipe, initial, n_range, interval_s)
    if not ev.feasible or not guards:
        return ev
    try:
        rejected = [measure_word(model, recipe, initial, w, interval_s)[0] for w in guards]
    except (SimulationError, ConsistencyError) as e:
        return Evaluation(settings.INFEASIBLE_PENALTY, False, ev.areas, 0.0, str(e), ev.spread)
    margin = reject_margin(list(ev.areas.values()), rejected)
    penalty = settings.SEPARATION_WEIGHT * max(0.0, settings.SEPARATION_TARGET_REL - margin)
    return Evaluation(ev.spread + penalty, True, ev.areas, ev.frequency_hz, None, ev.spread, margin)


def measure_rejects(
    model: BZModel,
    recipe: AliquotRecipe,
    initial: Mixture,
    interval_s: float = settings.TAU_S,
    n_values: Sequence[int] = settings.SIGNATURE_N,
) -> List[RejectSample]:
    """섭동 족 (n_values 마다 한 블록 +/-1, +/-2) 을 시뮬레이션한다. 실패한 단어는 건너뛴다."""
    samples: List[RejectSample] = []
    seen = set()
    for n in n_values:
        for word, kind in perturbation_words(n):
            if str(word) in seen:
                continue
            seen.add(str(word))
            try:
                area, desc = measure_word(model, recipe, initial, word, interval_s)
            except (SimulationError, ConsistencyError) as e:
                logger.warning(f"reject 단어 '{word}' 측정 실패: {e}")
                continue
            samples.append(RejectSample(word, kind, area, desc))
    return samples


def tune_recipe(
    model: BZModel,
    n_range: Sequence[int] = settings.TUNE_N_RANGE,
    initial_recipe: Optional[AliquotRecipe] = None,
    budget: int = settings.TUNE_BUDGET,
    seed: int = 0,
    initial: Optional[Mixture] = None,
    interval_s: float = settings.TAU_S,
    calibrate: bool = True,
    separate: bool = True,
) -> TuneResult:
    """Nelder-Mead 로 면적 spread 와 reject 겹침을 줄이는 aliquot 배율을 찾는다.

    시작점을 먼저 평가하고, 모든 평가 중 가장 좋은 점을 반환하므로
    결과는 시작점보다 나빠지지 않는다. calibrate 이면 상위 후보부터 전체 섭동 족을
    시뮬레이션해 수용 범위와 reject 가 분리되는 첫 후보를 고르고 시그니처를 만든다.

    Raises:
        ValueError: n_range 또는 budget 오류
        TuningError: feasible 한 점을 하나도 찾지 못함
    """
    if not n_range or any(n < 1 or n > 5 for n in n_range):
        raise ValueError(f"n_range 는 1..5 의 부분집합이어야 합니다: {list(n_range)}")
    if budget < 1:
        raise ValueError(f"budget 은 1 이상이어야 합니다: {budget}")
    base = initial_recipe or default_tm_recipe()
    initial = initial or default_tm_initial()
    guards = guard_words() if separate else []

    cache: Dict[Tuple[float, ...], Evaluation] = {}
    order: List[Tuple[Tuple[float, ...], Evaluation]] = []

    def evaluate(theta: np.ndarray) -> float:
        key = tuple(round(float(x), 12) for x in theta)
        if key in cache:
            return cache[key].objective
        if len(order) >= budget:
            raise _BudgetExhausted()
        ev = tuning_objective(model, scaled_recipe(base, key), initial, n_range, interval_s, guards)
        cache[key] = ev
        order.append((key, ev))
        margin = "" if ev.reject_margin is None else f" margin={ev.reject_margin:.5f}"
        logger.info(
            f"튜닝 평가 {len(order)}/{budget}: obj={ev.objective:.5f}{margin} "
            f"factors={[round(math.exp(x), 4) for x in key]}{'' if ev.feasible else ' (infeasible)'}"
        )
        return ev.objective

    x0 = np.zeros(len(TUNED_SYMBOLS))
    rng = np.random.default_rng(seed)
    simplex = [x0.copy()]
    for axis in rng.permutation(len(TUNED_SYMBOLS)):
        vertex = x0.copy()
        vertex[axis] += settings.TUNE_INITIAL_STEP
        simplex.append(vertex)

    initial_objective = evaluate(x0)
    try:
        minimize(
            evaluate,
            x0,
            method="Nelder-Mead",
            options={
                "initial_simplex": np.array(simplex),
                "maxfev": budget,
                "xatol": 1e-3,
                "fatol": 1e-4,
            },
        )
    except _BudgetExhausted:
        logger.info(f"튜닝 평가 예산 {budget}회 소진")

    history: List[float] = []
    best = order[0][1]
    for _, ev in order:
        if ev.objective < best.objective:
            best = ev
        history.append(best.objective)

    ranked = sorted((kv for kv in order if kv[1].feasible), key=lambda kv: kv[1].objective)
    if not ranked:
        raise TuningError(
            "진동 영역의 feasible 레시피를 찾지 못했습니다",
            diagnostics={
                "evaluations": len(order),
                "reasons": sorted({ev.diagnostic or "" for _, ev in order}),
            },
        )

    def tuned(key: Tuple[float, ...]) -> AliquotRecipe:
        recipe = scaled_recipe(base, key)
        return AliquotRecipe(f"{base.recipe_id}-tuned", recipe.language, recipe.entries)

    if calibrate:
        chosen = None
        for rank, (key, ev) in enumerate(ranked[: settings.SEPARATION_CANDIDATES]):
            recipe = tuned(key)
            samples = measure_rejects(model, recipe, initial, interval_s)
            band = accept_band(list(ev.areas.values()), [s.area_Vs for s in samples])
            logger.info(f"후보 {rank + 1}: reject {len(samples)}개, 간격={band.margin_rel}")
            if chosen is None or _margin_key(band) > _margin_key(chosen[3]):
                chosen = (key, ev, recipe, band, samples)
            if band.separated:
                break
        key, ev, recipe, band, samples = chosen
        if not band.separated:
            logger.warning(f"수용 범위와 reject 면적이 분리되지 않았습니다 (간격 {band.margin_rel:.5f})")
        calibration = calibrate_signatures(
            TMCalibration(band.center_Vs, band.half_width_Vs), samples
        )
    else:
        key, ev = ranked[0]
        recipe = tuned(key)
        band = accept_band(list(ev.areas.values()))
        calibration = TMCalibration(band.center_Vs, band.half_width_Vs)

    spread = ev.spread if ev.spread is not None else ev.objective
    logger.info(
        f"튜닝 완료: J={spread:.5f}, A*={band.center_Vs:.4f} V·s, delta={band.half_width_Vs:.4f} V·s"
    )
    return TuneResult(
        recipe=recipe,
        calibration=calibration,
        objective=ev.objective,
        initial_objective=initial_objective,
        history=history,
        areas=dict(ev.areas),
        scale_factors={s.value: math.exp(x) for s, x in zip(TUNED_SYMBOLS, key)},
        seed=seed,
        evaluations=len(order),
        spread=spread,
        reject_margin=band.margin_rel,
    )


def _margin_key(band: AcceptBand) -> float:
    return -math.inf if band.margin_rel is None else band.margin_rel


def _feature_scale(values: Sequence[float], fallback: float) -> float:
    std = float(np.std(values)) if len(values) > 1 else 0.0
    return std if std > 0.0 else fallback


def calibrate_signatures(calibration: TMCalibration, samples: Sequence[RejectSample]) -> TMCalibration:
    """측정된 섭동 단어로 reject 시그니처 라이브러리와 excess-a 쪽을 정한다.

    특징은 라이브러리 안의 표준편차로 정규화한다.
    """
    excess_a = [s.area_Vs for s in samples if s.kind is RejectKind.EXCESS_A]
    side = "above"
    if excess_a and float(np.mean(excess_a)) < calibration.area_center_Vs:
        side = "below"

    scales = {
        "area": _feature_scale([s.area_Vs for s in samples], abs(calibration.area_center_Vs) or 1.0),
        "frequency": _feature_scale([s.descriptors.frequency_hz for s in samples], 1.0),
        "amplitude": _feature_scale([s.descriptors.amplitude_diff_v for s in samples], 1.0),
    }
    base = TMCalibration(calibration.area_center_Vs, calibration.half_width_Vs, side, (), scales)
    signatures = tuple(
        RejectSignature(s.kind, tuple(float(x) for x in base.features(s.area_Vs, s.descriptors)), str(s.word))
        for s in samples
    )
    counts = {k.value: sum(1 for s in signatures if s.kind is k) for k in SIGNATURE_KINDS}
    logger.info(f"시그니처 보정: excess-a 쪽={side}, {counts}")
    return TMCalibration(calibration.area_center_Vs, calibration.half_width_Vs, side, signatures, scales)
