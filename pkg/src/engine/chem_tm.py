"""
BZ 진동 반응 2-스택 PDA / TM (L3 = a^n b^n c^n)

- 동역학: 3변수 Oregonator (HBrO2 = X, Br- = Y, 산화 촉매 Ru3+ = Z)
- 풀(pool) 화학종: BrO3- (a), 말론산 MA (b), H+ (c = NaOH 로 감소), 촉매 총량 Ru_tot (#)
  풀 농도는 주입 사이에는 일정하고 aliquot 주입으로만 바뀐다
- 관측: Nernst 전위 V, 면적 지표, 진동 특징 (진동수, 진폭 차이)
- 판정: 풀 장부로 순서 위반(BadOrder) 고정, 그 외에는 보정된 수용 밴드

한국어 주석 포함.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, ClassVar, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from config import settings
from src.automata.formal import Language, RejectKind, Symbol, Verdict, follows_abc_order
from src.engine.errors import ConfigError, SimulationError
from src.engine.features import OscillationDescriptors, estimate_descriptors
from src.engine.integrator import Tolerances, integrate_interval
from src.engine.reactor import AliquotEntry, AliquotRecipe, FeedSchedule, Mixture, Trajectory
from src.engine.redox import (
    AreaMetric,
    RedoxObservables,
    area_word,
    gibbs_energy,
    nernst_clamped,
    nernst_potential,
)
from src.engine.thermo import ThermoDB

logger = logging.getLogger(__name__)

# 화학종 id
HBRO2 = "HBrO2"
BROMIDE = "Br-"
RU3 = "Ru3+"
BROMATE = "BrO3-"
MALONIC = "MA"
PROTON = "H+"
CATALYST = "Ru_tot"
SODIUM = "Na+"
HYDROXIDE = "OH-"

DYNAMIC_SPECIES = (HBRO2, BROMIDE, RU3)


@dataclass(frozen=True)
class Pools:
    bromate_M: float
    malonic_M: float
    acid_M: float
    catalyst_M: float

    @classmethod
    def from_mixture(cls, mix: Mixture) -> "Pools":
        return cls(mix.conc(BROMATE), mix.conc(MALONIC), mix.conc(PROTON), mix.conc(CATALYST))


@dataclass(frozen=True)
class RateCoefficients:
    """풀 농도를 곱한 유효 속도상수"""

    ka1: float  # k1 H^2 A
    ka2: float  # k2 H
    ka3: float  # k3 H A
    k4: float
    kb: float   # kc B
    catalyst_M: float
    f: float


@dataclass(frozen=True)
class BZModel:
    """차원 있는 Oregonator.

    r1 = k1 H^2 A Y, r2 = k2 H X Y, r3 = k3 H A X (C - Z)/C, r4 = k4 X^2, r5 = kc B Z
    dX = r1 - r2 + r3 - 2 r4,  dY = -r1 - r2 + (f/2) r5,  dZ = 2 r3 - r5
    """

    language: ClassVar[Language] = Language.L3

    k1: float = settings.BZ_K1
    k2: float = settings.BZ_K2
    k3: float = settings.BZ_K3
    k4: float = settings.BZ_K4
    kc: float = settings.BZ_KC
    f: float = settings.BZ_STOICH_F
    neutralization_dh_kJ_per_mol: float = settings.NEUTRALIZATION_DH_KJ
    tolerances: Tolerances = field(default_factory=Tolerances)
    calibration: Optional["TMCalibration"] = None

    def __post_init__(self) -> None:
        for name in ("k1", "k2", "k3", "k4", "kc"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"속도상수 {name} 는 양수여야 합니다: {getattr(self, name)}")
        if not 0.0 < self.f <= 3.0:
            raise ValueError(f"화학량론 계수 f 는 (0, 3] 범위여야 합니다: {self.f}")

    @classmethod
    def from_thermo(cls, db: ThermoDB, **kwargs: Any) -> "BZModel":
        return cls(neutralization_dh_kJ_per_mol=db.reaction("neutralization"), **kwargs)

    def with_calibration(self, calibration: Optional["TMCalibration"]) -> "BZModel":
        return replace(self, calibration=calibration)

    def coefficients(self, pools: Pools) -> RateCoefficients:
        h, a, b = pools.acid_M, pools.bromate_M, pools.malonic_M
        return RateCoefficients(
            ka1=self.k1 * h * h * a,
            ka2=self.k2 * h,
            ka3=self.k3 * h * a,
            k4=self.k4,
            kb=self.kc * b,
            catalyst_M=pools.catalyst_M,
            f=self.f,
        )

    def redox(self, mix: Mixture) -> RedoxObservables:
        return RedoxObservables.for_catalyst(mix.conc(CATALYST), temperature_K=mix.temperature_K)

    # --- KineticSystem ---
    def state_vector(self, mix: Mixture) -> np.ndarray:
        return np.array([mix.conc(s) for s in DYNAMIC_SPECIES], dtype=float)

    def with_state(self, mix: Mixture, y: np.ndarray) -> Mixture:
        return mix.with_concentrations(dict(zip(DYNAMIC_SPECIES, (float(v) for v in y))))

    def rate_functions(self, mix: Mixture):
        coeff = self.coefficients(Pools.from_mixture(mix))
        return (
            lambda t, y: bz_derivatives(y, coeff),
            lambda t, y: bz_jacobian(y, coeff),
        )

    # --- 반응기 인터페이스 ---
    def react(self, mix: Mixture, symbol: Symbol) -> Mixture:
        if symbol is not Symbol.C:
            return mix
        return neutralize_acid(mix, self.neutralization_dh_kJ_per_mol)

    def evolve(self, mix: Mixture, duration_s: float, offsets_s: np.ndarray) -> List[Mixture]:
        return integrate_interval(mix, self, duration_s, self.tolerances, offsets_s)

    def observe(self, mix: Mixture) -> Dict[str, Any]:
        obs = self.redox(mix)
        z = mix.conc(RU3)
        c_tot = mix.conc(CATALYST)
        v = nernst_potential(z, c_tot - z, obs)
        return {
            "V_volt": v,
            "Ru3_frac": z / c_tot,
            "dG_J_per_mol": gibbs_energy(v, obs),
            "nernst_clamped": nernst_clamped(z, c_tot - z),
            "heat_kJ": mix.cumulative_heat_kJ,
        }

    def check_symbol(self, traj: Trajectory) -> Optional[Verdict]:
        inferred = ledger_symbols(traj)
        if ledger_order_violated(inferred):
            return Verdict.reject(RejectKind.BAD_ORDER)
        return None

    def verdict(self, traj: Trajectory, schedule: FeedSchedule) -> Verdict:
        if traj.pinned is not None:
            return traj.pinned
        area, descriptors = self.measure(traj, schedule)
        return tm_verdict(traj, descriptors, area, self.calibration)

    def sample_dt(self, schedule: FeedSchedule) -> float:
        return schedule.sample_dt_s or settings.TM_SAMPLE_DT_S

    def measure(self, traj: Trajectory, schedule: FeedSchedule) -> Tuple[AreaMetric, OscillationDescriptors]:
        """(면적, 진동 특징) - 둘 다 '#' 이후 구간 기준"""
        obs = self.redox(traj.final)
        area = area_word(traj, schedule, obs)
        return area, estimate_descriptors(traj, schedule, obs.v_max)

    def describe(self, traj: Trajectory, schedule: FeedSchedule) -> Dict[str, Any]:
        area, desc = self.measure(traj, schedule)
        out = {
            "area_Vs": area.area_Vs,
            "area_gibbs_Vs": area.area_gibbs_Vs,
            "v_max_volt": area.v_max_volt,
            "frequency_Hz": desc.frequency_hz,
            "amplitude_diff_V": desc.amplitude_diff_v,
            "peak_count": desc.peak_count,
            "degenerate": desc.degenerate,
        }
        if self.calibration is not None:
            out["locus_side"] = self.calibration.side(area.area_Vs)
        return out


def bz_derivatives(y: Sequence[float], coeff: RateCoefficients) -> np.ndarray:
    """d/dt [X, Y, Z]"""
    x, br, z = y
    c = coeff.catalyst_M
    reduced = (c - z) / c if c > 0.0 else 0.0
    r1 = coeff.ka1 * br
    r2 = coeff.ka2 * x * br
    r3 = coeff.ka3 * x * reduced
    r4 = coeff.k4 * x * x
    r5 = coeff.kb * z
    return np.array(
        [
            r1 - r2 + r3 - 2.0 * r4,
            -r1 - r2 + 0.5 * coeff.f * r5,
            2.0 * r3 - r5,
        ]
    )


def bz_jacobian(y: Sequence[float], coeff: RateCoefficients) -> np.ndarray:
    x, br, z = y
    c = coeff.catalyst_M
    if c > 0.0:
        reduced = (c - z) / c
        d_reduced = -1.0 / c
    else:
        reduced = d_reduced = 0.0
    ka1, ka2, ka3, k4, kb = coeff.ka1, coeff.ka2, coeff.ka3, coeff.k4, coeff.kb
    return np.array(
        [
            [-ka2 * br + ka3 * reduced - 4.0 * k4 * x, ka1 - ka2 * x, ka3 * x * d_reduced],
            [-ka2 * br, -ka1 - ka2 * x, 0.5 * coeff.f * kb],
            [2.0 * ka3 * reduced, 0.0, 2.0 * ka3 * x * d_reduced - kb],
        ]
    )


def neutralize_acid(mix: Mixture, delta_h_kJ_per_mol: float) -> Mixture:
    """NaOH 주입 직후 OH- + H+ -> H2O (강산-강염기, 즉시)"""
    n = min(mix.moles(HYDROXIDE), mix.moles(PROTON))
    if n <= 0.0:
        return mix
    v = mix.volume_dm3
    out = mix.with_concentrations(
        {
            HYDROXIDE: mix.conc(HYDROXIDE) - n / v,
            PROTON: mix.conc(PROTON) - n / v,
        }
    )
    return out.add_heat(abs(delta_h_kJ_per_mol) * n)


def infer_pathway(before: Mixture, after: Mixture) -> Optional[Symbol]:
    """주입 전후 풀 몰수 증가로 어떤 경로가 자극되었는지 추정한다."""
    for species, symbol in ((BROMATE, Symbol.A), (MALONIC, Symbol.B), (CATALYST, Symbol.END)):
        if after.moles(species) > before.moles(species) * (1.0 + 1e-12) + 1e-18:
            return symbol
    if after.moles(SODIUM) > before.moles(SODIUM) * (1.0 + 1e-12) + 1e-18:
        return Symbol.C
    return None


def ledger_symbols(traj: Trajectory) -> List[Optional[Symbol]]:
    """각 주입 시점의 풀 장부에서 추정한 기호 목록"""
    out: List[Optional[Symbol]] = []
    for inj in traj.injections:
        idx = inj.sample_index
        if idx > 0:
            before = traj.mixtures[idx - 1]
        elif traj.initial is not None:
            before = traj.initial
        else:
            out.append(None)
            continue
        # 주입 직후 순간 반응(중화)은 풀 증가 판정에 영향을 주지 않음
        out.append(infer_pathway(before, traj.mixtures[idx]))
    return out


def ledger_order_violated(inferred: Sequence[Optional[Symbol]]) -> bool:
    letters = []
    for s in inferred:
        if s is Symbol.END:
            if not letters:
                return True
            continue
        if s is None:
            continue
        letters.append(s)
    return not follows_abc_order(letters)


@dataclass(frozen=True)
class RejectSignature:
    """보정 단어 하나의 정규화된 (면적 편차, 진동수, 진폭 차이) 와 오라클 reject 종류"""

    kind: RejectKind
    features: Tuple[float, float, float]
    word: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"word": self.word, "reject_kind": self.kind.value, "features": list(self.features)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RejectSignature":
        features = tuple(float(x) for x in data["features"])
        if len(features) != 3:
            raise ValueError(f"시그니처 특징은 3개여야 합니다: {features}")
        return cls(RejectKind(data["reject_kind"]), features, str(data.get("word", "")))


@dataclass(frozen=True)
class TMCalibration:
    """수용 밴드 [A* - delta, A* + delta] 와 reject 시그니처 라이브러리.

    signatures: 보정 단어별 기준 시그니처. 밴드 밖 면적은 가장 가까운 시그니처의 종류로 분류한다.
    scales: 정규화 스케일 {"area", "frequency", "amplitude"}
    """

    area_center_Vs: float
    half_width_Vs: float
    excess_a_side: str = "above"
    signatures: Tuple[RejectSignature, ...] = ()
    scales: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not math.isfinite(self.area_center_Vs):
            raise ConfigError(f"A* 가 유한하지 않습니다: {self.area_center_Vs}")
        if not self.half_width_Vs >= 0.0:
            raise ConfigError(f"delta 는 0 이상이어야 합니다: {self.half_width_Vs}")
        if self.excess_a_side not in ("above", "below"):
            raise ConfigError(f"excess_a_side 오류: {self.excess_a_side}")
        object.__setattr__(self, "signatures", tuple(self.signatures))

    @property
    def band(self) -> Tuple[float, float]:
        return self.area_center_Vs - self.half_width_Vs, self.area_center_Vs + self.half_width_Vs

    def contains(self, area_Vs: float) -> bool:
        return abs(area_Vs - self.area_center_Vs) <= self.half_width_Vs

    def side(self, area_Vs: float) -> str:
        if self.contains(area_Vs):
            return "on"
        return "above" if area_Vs > self.area_center_Vs else "below"

    def features(self, area_Vs: float, descriptors: OscillationDescriptors) -> np.ndarray:
        area_scale = self.scales.get("area") or abs(self.area_center_Vs) or 1.0
        return np.array(
            [
                (area_Vs - self.area_center_Vs) / area_scale,
                descriptors.frequency_hz / (self.scales.get("frequency") or 1.0),
                descriptors.amplitude_diff_v / (self.scales.get("amplitude") or 1.0),
            ]
        )

    def nearest_signature(self, area_Vs: float, descriptors: OscillationDescriptors) -> Optional[RejectSignature]:
        if not self.signatures:
            return None
        point = self.features(area_Vs, descriptors)
        return min(
            self.signatures,
            key=lambda s: (float(np.linalg.norm(point - np.asarray(s.features))), s.kind.value, s.word),
        )

    def classify(self, area_Vs: float, descriptors: OscillationDescriptors) -> Verdict:
        if self.contains(area_Vs):
            return Verdict.accept()
        nearest = self.nearest_signature(area_Vs, descriptors)
        if nearest is not None:
            return Verdict.reject(nearest.kind)
        if self.side(area_Vs) == self.excess_a_side:
            return Verdict.reject(RejectKind.EXCESS_A)
        return Verdict.reject(RejectKind.EXCESS_C)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": settings.SCHEMA_VERSION,
            "area_center_Vs": self.area_center_Vs,
            "half_width_Vs": self.half_width_Vs,
            "excess_a_side": self.excess_a_side,
            "signatures": [s.to_dict() for s in self.signatures],
            "scales": dict(sorted(self.scales.items())),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TMCalibration":
        try:
            return cls(
                float(data["area_center_Vs"]),
                float(data["half_width_Vs"]),
                str(data.get("excess_a_side", "above")),
                tuple(RejectSignature.from_dict(s) for s in data.get("signatures", [])),
                {k: float(v) for k, v in data.get("scales", {}).items()},
            )
        except (KeyError, ValueError, TypeError) as e:
            raise ConfigError(f"보정 데이터 형식 오류: {e}") from None


def tm_verdict(
    traj: Trajectory,
    descriptors: OscillationDescriptors,
    area: AreaMetric,
    calib: Optional[TMCalibration],
) -> Verdict:
    """고정된 BadOrder 가 있으면 그대로, 아니면 수용 밴드와 시그니처로 판정한다.

    Raises:
        ConfigError: 보정값이 없음
    """
    if traj.pinned is not None:
        return traj.pinned
    if calib is None:
        raise ConfigError("L3 판정에는 보정값(수용 밴드)이 필요합니다")
    return calib.classify(area.area_Vs, descriptors)


def oscillation_period(
    model: BZModel, mix: Mixture, duration_s: float, tolerances: Optional[Tolerances] = None
) -> float:
    """Ru3+ 극대(dZ/dt 가 아래로 0 을 지남) 사이 간격의 평균. 처음 1/3 구간은 버린다.

    Raises:
        SimulationError: 적분 실패 또는 극대가 2개 미만
    """
    tol = tolerances or model.tolerances
    coeff = model.coefficients(Pools.from_mixture(mix))

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        return bz_derivatives(y, coeff)

    def z_peak(t: float, y: np.ndarray) -> float:
        return bz_derivatives(y, coeff)[2]

    z_peak.direction = -1.0

    sol = solve_ivp(
        rhs,
        (0.0, duration_s),
        model.state_vector(mix),
        method="BDF",
        jac=lambda t, y: bz_jacobian(y, coeff),
        events=z_peak,
        rtol=tol.rtol,
        atol=tol.absolute,
    )
    if sol.status < 0:
        raise SimulationError(f"주기 측정 적분 실패: {sol.message}")
    peaks = sol.t_events[0]
    peaks = peaks[peaks > duration_s / 3.0]
    if peaks.size < 2:
        raise SimulationError(f"극대가 부족합니다 ({peaks.size}개): 진동 영역이 아닙니다")
    period = float(np.mean(np.diff(peaks)))
    logger.debug(f"진동 주기 {period:.4f} s (rtol={tol.rtol:.0e}, 극대 {peaks.size}개)")
    return period


def default_tm_recipe(
    aliquot_volume_dm3: float = settings.TM_ALIQUOT_VOLUME_DM3,
) -> AliquotRecipe:
    """a: NaBrO3, b: 말론산, c: NaOH, #: Ru(bpy)3 촉매"""
    v = aliquot_volume_dm3
    n_a = v * settings.TM_A_CONC_M
    n_b = v * settings.TM_B_CONC_M
    n_c = v * settings.TM_C_CONC_M
    n_end = v * settings.TM_END_CONC_M
    return AliquotRecipe(
        "l3-default",
        Language.L3,
        {
            Symbol.A: AliquotEntry({BROMATE: n_a, SODIUM: n_a}, v),
            Symbol.B: AliquotEntry({MALONIC: n_b}, v),
            Symbol.C: AliquotEntry({HYDROXIDE: n_c, SODIUM: n_c}, v),
            Symbol.END: AliquotEntry({CATALYST: n_end}, v),
        },
    )


def default_tm_initial(volume_dm3: float = settings.TM_REACTOR_VOLUME_DM3) -> Mixture:
    """진동 중인 BZ 혼합물"""
    return Mixture(
        {
            BROMATE: settings.TM_BROMATE_M,
            MALONIC: settings.TM_MALONIC_M,
            PROTON: settings.TM_ACID_M,
            CATALYST: settings.TM_CATALYST_M,
            HBRO2: settings.TM_HBRO2_M,
            BROMIDE: settings.TM_BROMIDE_M,
            RU3: settings.TM_RU3_M,
        },
        volume_dm3,
    )
