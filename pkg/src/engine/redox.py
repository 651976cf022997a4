"""
산화환원 전위 관측 (Nernst / Gibbs / 면적 지표)

- V = V0 + (R T / n F) ln([ox]/[red])
- dG = -n F V
- 면적 A = V_max * tau' - int V dt  (구간 [t_i + 30, t_i + tau])

한국어 주석 포함.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Tuple

import numpy as np
from scipy.integrate import trapezoid

from config import settings
from src.automata.formal import Symbol
from src.engine.errors import ConsistencyError
from src.engine.reactor import FeedSchedule, Trajectory

logger = logging.getLogger(__name__)

AREA_FORM_RTOL = 1e-9


@dataclass(frozen=True)
class RedoxObservables:
    """Nernst 식 상수와 촉매 총량 (V_max 계산용)"""

    catalyst_total_M: float
    v0_volt: float = settings.V0_VOLT
    gas_constant: float = settings.GAS_CONSTANT
    temperature_K: float = settings.TEMPERATURE_K
    faraday: float = settings.FARADAY
    n_electrons: int = settings.N_ELECTRONS
    catalyst_eps_M: float = settings.CATALYST_EPS_M

    def __post_init__(self) -> None:
        if not self.temperature_K > 0.0:
            raise ValueError(f"온도는 양수여야 합니다: {self.temperature_K}")
        if self.n_electrons < 1:
            raise ValueError(f"전자 수 오류: {self.n_electrons}")
        if not self.catalyst_total_M > self.catalyst_eps_M:
            raise ValueError(f"촉매 총량이 너무 작습니다: {self.catalyst_total_M}")

    @classmethod
    def for_catalyst(cls, catalyst_total_M: float, **kwargs: Any) -> "RedoxObservables":
        return cls(catalyst_total_M=catalyst_total_M, **kwargs)

    @property
    def slope_volt(self) -> float:
        """R T / (n F), ln 단위"""
        return self.gas_constant * self.temperature_K / (self.n_electrons * self.faraday)

    @property
    def v_max(self) -> float:
        """촉매가 거의 전부 산화된 상태의 전위"""
        eps = self.catalyst_eps_M
        return nernst_potential(self.catalyst_total_M - eps, eps, self)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def nernst_clamped(ox: float, red: float) -> bool:
    return ox <= 0.0 or red <= 0.0


def nernst_potential(ox: float, red: float, obs: RedoxObservables) -> float:
    """Nernst 전위 (V). 0 이하 농도는 NERNST_FLOOR_M 으로 대체 (nernst_clamped 로 확인)"""
    floor = settings.NERNST_FLOOR_M
    ox_eff = ox if ox > 0.0 else floor
    red_eff = red if red > 0.0 else floor
    return obs.v0_volt + obs.slope_volt * math.log(ox_eff / red_eff)


def gibbs_energy(v_volt, obs: RedoxObservables):
    """dG = -n F V (J/mol). 스칼라와 배열 모두 허용"""
    return -obs.n_electrons * obs.faraday * v_volt


@dataclass(frozen=True)
class AreaMetric:
    area_Vs: float
    area_gibbs_Vs: float
    window_start_s: float
    window_end_s: float
    tau_prime_s: float
    v_max_volt: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _window_samples(times: np.ndarray, values: np.ndarray, t0: float, t1: float) -> Tuple[np.ndarray, np.ndarray]:
    """[t0, t1] 구간 샘플. 양 끝은 선형 보간으로 채운다."""
    inside = (times > t0) & (times < t1)
    t = np.concatenate(([t0], times[inside], [t1]))
    v = np.concatenate(([np.interp(t0, times, values)], values[inside], [np.interp(t1, times, values)]))
    return t, v


def area_over_window(
    times: np.ndarray, v_volt: np.ndarray, t_start_s: float, t_end_s: float, obs: RedoxObservables
) -> AreaMetric:
    """구간 면적. Nernst 형태와 Gibbs 형태를 모두 계산해 일치를 확인한다.

    Raises:
        ValueError: 샘플이 구간을 덮지 않음
        ConsistencyError: 두 형태의 상대 차이가 1e-9 초과
    """
    times = np.asarray(times, dtype=float)
    v_volt = np.asarray(v_volt, dtype=float)
    if times.size < 2 or t_start_s < times[0] - 1e-9 or t_end_s > times[-1] + 1e-9:
        raise ValueError(
            f"궤적이 면적 구간 [{t_start_s:.1f}, {t_end_s:.1f}] s 를 덮지 않습니다"
        )
    tau_prime = t_end_s - t_start_s
    t, v = _window_samples(times, v_volt, t_start_s, t_end_s)
    v_max = obs.v_max
    area = v_max * tau_prime - trapezoid(v, t)

    nf = obs.n_electrons * obs.faraday
    dg_full = gibbs_energy(v_max, obs)
    area_gibbs = -(dg_full * tau_prime - trapezoid(gibbs_energy(v, obs), t)) / nf

    scale = max(abs(area), abs(v_max) * tau_prime)
    if abs(area - area_gibbs) > AREA_FORM_RTOL * scale:
        raise ConsistencyError(f"면적 계산 불일치: {area!r} vs {area_gibbs!r}")
    return AreaMetric(area, area_gibbs, t_start_s, t_end_s, tau_prime, v_max)


def area_word(traj: Trajectory, schedule: FeedSchedule, obs: RedoxObservables) -> AreaMetric:
    """'#' 이후 구간 [t_# + 30, t_# + tau] 의 면적"""
    t_mark = schedule.t_end_marker_s
    return area_over_window(
        traj.time_array(),
        traj.column("V_volt"),
        t_mark + settings.TRANSIENT_DISCARD_S,
        t_mark + schedule.interval_s,
        obs,
    )


def symbol_area_costs(
    traj: Trajectory, schedule: FeedSchedule, obs: RedoxObservables
) -> List[Tuple[Symbol, float]]:
    """기호마다 주입 후 구간 면적 (마지막 항목은 area_word 와 같다)"""
    times = traj.time_array()
    v = traj.column("V_volt")
    costs = []
    for inj in traj.injections:
        metric = area_over_window(
            times,
            v,
            inj.time_s + settings.TRANSIENT_DISCARD_S,
            inj.time_s + schedule.interval_s,
            obs,
        )
        costs.append((inj.symbol, metric.area_Vs))
    return costs
