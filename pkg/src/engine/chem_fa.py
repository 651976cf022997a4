"""
침전 반응 유한 오토마타 (L1)

- a: KIO3 aliquot, b: AgNO3 aliquot
- [Ag+][IO3-] > Ksp 이면 AgIO3 가 즉시 침전 (평형, 속도식 없음)
- 판정: 보이는 침전(VISIBILITY_MOL 이상) = 방출열 있음 → Accept

한국어 주석 포함.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, ClassVar, Dict, List, Optional

import numpy as np

from config import settings
from src.automata.formal import Language, RejectKind, Symbol, Verdict
from src.engine.errors import ConsistencyError
from src.engine.reactor import AliquotEntry, AliquotRecipe, FeedSchedule, Mixture, Trajectory
from src.engine.thermo import ThermoDB

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrecipitationModel:
    """AgIO3 침전 모델.

    delta_h_kJ_per_mol 은 부호 있는 반응 엔탈피 (발열이면 음수).
    """

    language: ClassVar[Language] = Language.L1

    ksp: float = settings.KSP_AGIO3
    delta_h_kJ_per_mol: float = -55.4
    visibility_mol: float = settings.VISIBILITY_MOL
    cation: str = "Ag+"
    anion: str = "IO3-"
    solid: str = "AgIO3(s)"

    def __post_init__(self) -> None:
        if not self.ksp > 0.0:
            raise ValueError(f"Ksp 는 양수여야 합니다: {self.ksp}")

    @classmethod
    def from_thermo(cls, db: ThermoDB, **kwargs: Any) -> "PrecipitationModel":
        return cls(delta_h_kJ_per_mol=db.reaction("agio3_precipitation"), **kwargs)

    # --- 반응기 인터페이스 ---
    def react(self, mix: Mixture, symbol: Symbol) -> Mixture:
        return equilibrate_precipitation(mix, self)

    def evolve(self, mix: Mixture, duration_s: float, offsets_s: np.ndarray) -> List[Mixture]:
        # 침전은 주입 직후 평형으로 끝나므로 주입 사이에는 변화 없음
        return [mix] * len(offsets_s)

    def observe(self, mix: Mixture) -> Dict[str, Any]:
        return {"precipitate_mol": mix.moles(self.solid), "heat_kJ": mix.cumulative_heat_kJ}

    def check_symbol(self, traj: Trajectory) -> Optional[Verdict]:
        return None

    def verdict(self, traj: Trajectory, schedule: FeedSchedule) -> Verdict:
        return fa_verdict(traj, self)

    def sample_dt(self, schedule: FeedSchedule) -> float:
        return schedule.sample_dt_s or schedule.interval_s / settings.SAMPLES_PER_INTERVAL

    def describe(self, traj: Trajectory, schedule: FeedSchedule) -> Dict[str, Any]:
        final = traj.final
        return {"precipitate_mol": final.moles(self.solid), "heat_kJ": final.cumulative_heat_kJ}


def precipitated_concentration(cation_M: float, anion_M: float, ksp: float) -> float:
    """(c - x)(a - x) = Ksp 의 작은 근 x (mol/dm3). Q <= Ksp 이면 0.

    상쇄 오차를 줄이기 위해 x = 2(ca - Ksp) / ((c + a) + sqrt((c - a)^2 + 4Ksp)) 형태를 쓴다.
    """
    q = cation_M * anion_M
    if q <= ksp:
        return 0.0
    disc = math.sqrt((cation_M - anion_M) ** 2 + 4.0 * ksp)
    x = 2.0 * (q - ksp) / ((cation_M + anion_M) + disc)
    return min(x, cation_M, anion_M)


def equilibrate_precipitation(mix: Mixture, model: PrecipitationModel) -> Mixture:
    """이온곱이 Ksp 를 넘으면 침전시키고 누적열에 |dHr| * x * V 를 더한다."""
    ag = mix.conc(model.cation)
    io3 = mix.conc(model.anion)
    x = precipitated_concentration(ag, io3, model.ksp)
    if x <= 0.0:
        return mix
    out = mix.with_concentrations(
        {
            model.cation: ag - x,
            model.anion: io3 - x,
            model.solid: mix.conc(model.solid) + x,
        }
    )
    heat = abs(model.delta_h_kJ_per_mol) * x * mix.volume_dm3
    logger.debug(f"AgIO3 침전 {x * mix.volume_dm3:.3e} mol, 방출열 {heat:.3e} kJ")
    return out.add_heat(heat)


def fa_verdict(traj: Trajectory, model: PrecipitationModel) -> Verdict:
    """최종 침전량과 방출열이 모두 임계값을 넘으면 Accept.

    Raises:
        ConsistencyError: 침전과 방출열 신호가 서로 다를 때
    """
    final = traj.final
    solid_mol = final.moles(model.solid)
    heat = final.cumulative_heat_kJ - (traj.injections[0].heat_before_kJ if traj.injections else 0.0)
    heat_threshold = abs(model.delta_h_kJ_per_mol) * model.visibility_mol

    precipitate_seen = solid_mol >= model.visibility_mol
    heat_seen = heat >= heat_threshold * (1.0 - 1e-9)
    if precipitate_seen != heat_seen:
        raise ConsistencyError(
            f"침전({solid_mol:.3e} mol) 과 방출열({heat:.3e} kJ) 신호가 일치하지 않습니다"
        )
    if precipitate_seen:
        return Verdict.accept()
    return Verdict.reject(RejectKind.NO_REACTION)


def default_fa_recipe(
    aliquot_volume_dm3: float = settings.FA_ALIQUOT_VOLUME_DM3,
    conc_M: float = settings.FA_ALIQUOT_CONC_M,
) -> AliquotRecipe:
    """기본 레시피: 0.1 M KIO3 (a), 0.1 M AgNO3 (b), '#' 은 순수 용매"""
    n = aliquot_volume_dm3 * conc_M
    return AliquotRecipe(
        "l1-default",
        Language.L1,
        {
            Symbol.A: AliquotEntry({"K+": n, "IO3-": n}, aliquot_volume_dm3),
            Symbol.B: AliquotEntry({"Ag+": n, "NO3-": n}, aliquot_volume_dm3),
            Symbol.END: AliquotEntry({}, aliquot_volume_dm3, inert=True),
        },
    )


def default_fa_initial(volume_dm3: float = settings.FA_REACTOR_VOLUME_DM3) -> Mixture:
    return Mixture({}, volume_dm3)
