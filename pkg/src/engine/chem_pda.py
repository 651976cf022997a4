"""
산-염기 1-스택 푸시다운 오토마타 (L2, Dyck 언어)

- '(' : NaOH aliquot, ')' : 말론산(H2Mal) aliquot, '#' : 메틸레드 지시약 (불활성)
- 반응기의 pH 가 스택 역할: midpoint 부근 = 빈 스택
- 주입 직후 순간 평형 (전하 균형식의 근으로 pH 계산)
- 엔탈피 수율 Y = 반응열 / 입력 생성열 * 100

한국어 주석 포함.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Any, ClassVar, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from config import settings
from src.automata.formal import Language, RejectKind, Symbol, Verdict, Word
from src.engine.errors import NumericalError, UndefinedYieldError, WordError
from src.engine.reactor import (
    AliquotEntry,
    AliquotRecipe,
    FeedSchedule,
    Mixture,
    Trajectory,
    inject_aliquot,
    total_injected_moles,
)
from src.engine.thermo import ThermoDB

logger = logging.getLogger(__name__)

RESIDUAL_TOL_M = 1e-12


class StackStatus(Enum):
    OK = "Ok"
    UNDERFLOW = "Underflow"


@dataclass(frozen=True)
class AcidBaseModel:
    """말론산/NaOH 평형 모델.

    midpoint_ph 기본값은 (pKa1 + pKa2) / 2 (수소말론산 양쪽성 지점).
    """

    language: ClassVar[Language] = Language.L2

    ka1: float = 10.0 ** -settings.PKA1
    ka2: float = 10.0 ** -settings.PKA2
    kw: float = settings.KW
    midpoint_ph: float = 0.5 * (settings.PKA1 + settings.PKA2)
    band_eps: float = settings.BAND_EPS
    red_ph: float = settings.METHYL_RED_RED_PH
    yellow_ph: float = settings.METHYL_RED_YELLOW_PH
    neutralization_dh_kJ_per_mol: float = settings.NEUTRALIZATION_DH_KJ
    base_species: str = "NaOH"
    acid_species: str = "H2Mal"
    indicator_species: str = "methyl_red"

    def __post_init__(self) -> None:
        if not self.ka1 > self.ka2 > 0.0:
            raise ValueError(f"Ka1 > Ka2 > 0 이어야 합니다: Ka1={self.ka1}, Ka2={self.ka2}")
        if not 0.0 < self.midpoint_ph < 14.0:
            raise ValueError(f"midpoint pH 범위 오류: {self.midpoint_ph}")
        if not self.band_eps > 0.0:
            raise ValueError(f"band_eps 는 양수여야 합니다: {self.band_eps}")
        if not self.red_ph < self.yellow_ph:
            raise ValueError("지시약 변색 구간 오류")

    @classmethod
    def from_thermo(cls, db: ThermoDB, **kwargs: Any) -> "AcidBaseModel":
        return cls(neutralization_dh_kJ_per_mol=db.reaction("neutralization"), **kwargs)

    @property
    def lower_ph(self) -> float:
        return self.midpoint_ph - self.band_eps

    @property
    def upper_ph(self) -> float:
        return self.midpoint_ph + self.band_eps

    def totals(self, mix: Mixture) -> Tuple[float, float]:
        """(C_acid, C_base) 분석 농도"""
        return max(mix.conc(self.acid_species), 0.0), max(mix.conc(self.base_species), 0.0)

    def ph(self, mix: Mixture) -> float:
        c_acid, c_base = self.totals(mix)
        return solve_ph(c_acid, c_base, self)

    # --- 반응기 인터페이스 ---
    def react(self, mix: Mixture, symbol: Symbol) -> Mixture:
        # 누적열은 조성의 상태함수: |dH| * 중화 진행도
        heat = abs(self.neutralization_dh_kJ_per_mol) * neutralization_extent(mix, self)
        return mix.add_heat(heat - mix.cumulative_heat_kJ)

    def evolve(self, mix: Mixture, duration_s: float, offsets_s: np.ndarray) -> List[Mixture]:
        return [mix] * len(offsets_s)

    def observe(self, mix: Mixture) -> Dict[str, Any]:
        ph = self.ph(mix)
        return {"pH": ph, "indicator_color": indicator_color(ph, self), "heat_kJ": mix.cumulative_heat_kJ}

    def check_symbol(self, traj: Trajectory) -> Optional[Verdict]:
        inj = traj.injections[-1]
        if traj.observables[inj.sample_index]["pH"] < self.lower_ph:
            return Verdict.reject(RejectKind.POP_EMPTY_STACK)
        return None

    def verdict(self, traj: Trajectory, schedule: FeedSchedule) -> Verdict:
        return pda_verdict(traj, self)

    def sample_dt(self, schedule: FeedSchedule) -> float:
        return schedule.sample_dt_s or schedule.interval_s / settings.SAMPLES_PER_INTERVAL

    def describe(self, traj: Trajectory, schedule: FeedSchedule) -> Dict[str, Any]:
        obs = traj.observables[-1]
        return {
            "pH": obs["pH"],
            "indicator_color": obs["indicator_color"],
            "heat_kJ": obs["heat_kJ"],
        }


def _alphas(h: float, model: AcidBaseModel) -> Tuple[float, float, float]:
    """H2Mal, HMal-, Mal2- 분율"""
    k1, k2 = model.ka1, model.ka2
    d = h * h + k1 * h + k1 * k2
    return h * h / d, k1 * h / d, k1 * k2 / d


def charge_balance_residual(h: float, c_acid: float, c_base: float, model: AcidBaseModel) -> float:
    """[H+] + [Na+] - [OH-] - [HMal-] - 2[Mal2-] (mol/dm3). h 에 대해 단조 증가."""
    _, a1, a2 = _alphas(h, model)
    return h + c_base - model.kw / h - c_acid * (a1 + 2.0 * a2)


@lru_cache(maxsize=65536)
def solve_ph(c_acid: float, c_base: float, model: AcidBaseModel = AcidBaseModel()) -> float:
    """전하 균형식의 양의 근으로 pH 를 구한다.

    log10[H+] 공간에서 brentq 로 탐색한다 ([H+] 구간 H_MIN_M..H_MAX_M).

    Raises:
        ValueError: 음의 농도
        NumericalError: 근이 구간에 없거나 잔차가 허용치를 넘음
    """
    if c_acid < 0.0 or c_base < 0.0:
        raise ValueError(f"분석 농도는 0 이상이어야 합니다: C_acid={c_acid}, C_base={c_base}")

    def f(log_h: float) -> float:
        return charge_balance_residual(10.0 ** log_h, c_acid, c_base, model)

    lo, hi = math.log10(settings.H_MIN_M), math.log10(settings.H_MAX_M)
    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo < 0.0 < f_hi):
        raise NumericalError(
            f"[H+] 근이 구간에 없습니다: C_acid={c_acid}, C_base={c_base}, f=({f_lo:.3e}, {f_hi:.3e})"
        )
    log_h = brentq(f, lo, hi, xtol=1e-14, maxiter=200)
    residual = f(log_h)
    if abs(residual) >= RESIDUAL_TOL_M:
        raise NumericalError(f"전하 균형 잔차 초과: {residual:.3e} M")
    return -log_h


def indicator_color(ph: float, model: AcidBaseModel) -> str:
    """메틸레드 색: red / transition / yellow"""
    if ph <= model.red_ph:
        return "red"
    if ph >= model.yellow_ph:
        return "yellow"
    return "transition"


def neutralization_extent(mix: Mixture, model: AcidBaseModel) -> float:
    """중화된 첫 번째 양성자 몰수.

    xi = max(0, min(N_base - V[OH-], C_acid V (1 - alpha0)))
    """
    c_acid, c_base = model.totals(mix)
    if c_acid == 0.0 or c_base == 0.0:
        return 0.0
    h = 10.0 ** -solve_ph(c_acid, c_base, model)
    alpha0, _, _ = _alphas(h, model)
    v = mix.volume_dm3
    consumed_base = (c_base - model.kw / h) * v
    deprotonated = c_acid * v * (1.0 - alpha0)
    return max(0.0, min(consumed_base, deprotonated))


def pda_process_symbol(
    mix: Mixture, symbol: Symbol, recipe: AliquotRecipe, model: AcidBaseModel
) -> Tuple[Mixture, StackStatus]:
    """기호 하나를 주입하고 pH 로 스택 상태를 읽는다.

    Raises:
        WordError: '(' ')' '#' 이외의 기호
    """
    if symbol not in (Symbol.OPEN, Symbol.CLOSE, Symbol.END):
        raise WordError(f"L2 에서 처리할 수 없는 기호: '{symbol.value}'")
    out = model.react(inject_aliquot(mix, recipe.entry(symbol)), symbol)
    status = StackStatus.UNDERFLOW if model.ph(out) < model.lower_ph else StackStatus.OK
    return out, status


def pda_verdict(traj: Trajectory, model: AcidBaseModel) -> Verdict:
    """기호 직후 pH 가 한 번이라도 하한 아래면 PopEmptyStack,
    끝에서 상한 위면 NonEmptyStack, 아니면 Accept."""
    for inj, obs in traj.post_injection():
        if obs["pH"] < model.lower_ph:
            return Verdict.reject(RejectKind.POP_EMPTY_STACK)
    final_ph = traj.observables[-1]["pH"]
    if final_ph > model.upper_ph:
        return Verdict.reject(RejectKind.NON_EMPTY_STACK)
    return Verdict.accept()


def matched_pairs(word: Word, mode: str = "prefix") -> int:
    """균형 맞은 괄호 쌍 수.

    prefix: 접두사 순서로 매칭 (빈 스택에서 닫는 괄호는 무시)
    min: min(#open, #close)
    """
    if mode == "min":
        return min(word.count(Symbol.OPEN), word.count(Symbol.CLOSE))
    if mode != "prefix":
        raise ValueError(f"알 수 없는 n_pairs 모드: {mode}")
    depth = 0
    pairs = 0
    for s in word.symbols:
        if s is Symbol.OPEN:
            depth += 1
        elif s is Symbol.CLOSE and depth > 0:
            depth -= 1
            pairs += 1
    return pairs


def _input_formation_heat(recipe: AliquotRecipe, feed, db: ThermoDB) -> float:
    db.require(recipe.reactive_species())
    denominator = db.input_formation_heat(total_injected_moles(recipe, feed, include_inert=False))
    if denominator == 0.0:
        raise UndefinedYieldError("입력 생성열이 0 입니다 (반응성 입력 없음)")
    return denominator


def enthalpy_yield(traj: Trajectory, recipe: AliquotRecipe, db: ThermoDB) -> float:
    """누적 반응열 장부로 계산한 엔탈피 수율 (%).

    분자는 부호 있는 반응 엔탈피(발열 음수), 분모는 불활성 aliquot 을 뺀 입력 생성열.

    Raises:
        ConfigError: 레시피의 반응성 화학종 중 생성 엔탈피가 없는 것이 있음
        UndefinedYieldError: 분모 0
    """
    feed = [inj.symbol for inj in traj.injections]
    denominator = _input_formation_heat(recipe, feed, db)
    heat = traj.final.cumulative_heat_kJ - (traj.initial.cumulative_heat_kJ if traj.initial else 0.0)
    return 100.0 * (-heat) / denominator


def enthalpy_yield_approx(
    word: Word, recipe: AliquotRecipe, db: ThermoDB, model: Optional[AcidBaseModel] = None, mode: str = "prefix"
) -> float:
    """n_pairs * (aliquot 당 몰수) * dH_neut 근사 수율 (%)"""
    model = model or AcidBaseModel.from_thermo(db)
    denominator = _input_formation_heat(recipe, word.symbols, db)
    per_aliquot = min(
        recipe.entry(Symbol.OPEN).amounts_mol.get(model.base_species, 0.0),
        recipe.entry(Symbol.CLOSE).amounts_mol.get(model.acid_species, 0.0),
    )
    numerator = matched_pairs(word, mode) * per_aliquot * model.neutralization_dh_kJ_per_mol
    return 100.0 * numerator / denominator


def yield_report(
    traj: Trajectory, word: Word, recipe: AliquotRecipe, db: ThermoDB, model: AcidBaseModel, mode: str = "prefix"
) -> Dict[str, Any]:
    """수율 리포트 {word, Y_exact_pct, Y_approx_pct, n_pairs}"""
    return {
        "word": str(word),
        "Y_exact_pct": enthalpy_yield(traj, recipe, db),
        "Y_approx_pct": enthalpy_yield_approx(word, recipe, db, model, mode),
        "n_pairs": matched_pairs(word, mode),
    }


def default_pda_recipe(
    aliquot_volume_dm3: float = settings.PDA_ALIQUOT_VOLUME_DM3,
    conc_M: float = settings.PDA_ALIQUOT_CONC_M,
    indicator_mol: float = settings.INDICATOR_MOL,
) -> AliquotRecipe:
    """1:1 보정 레시피: '(' 0.1 M NaOH, ')' 0.1 M 말론산, '#' 메틸레드"""
    n = aliquot_volume_dm3 * conc_M
    return AliquotRecipe(
        "l2-default",
        Language.L2,
        {
            Symbol.OPEN: AliquotEntry({"NaOH": n}, aliquot_volume_dm3),
            Symbol.CLOSE: AliquotEntry({"H2Mal": n}, aliquot_volume_dm3),
            Symbol.END: AliquotEntry({"methyl_red": indicator_mol}, aliquot_volume_dm3, inert=True),
        },
    )


def default_pda_initial(volume_dm3: float = settings.PDA_REACTOR_VOLUME_DM3) -> Mixture:
    return Mixture({}, volume_dm3)
