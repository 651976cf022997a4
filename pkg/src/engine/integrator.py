"""
강성(stiff) ODE 구간 적분기

- scipy solve_ivp (BDF, 해석적 Jacobian)
- 조밀 출력(dense_output)을 반응기 샘플 시각에서 평가
- 모든 적분 스텝에서 -1e-12 M 보다 더 음수로 내려가면 rtol 을 줄여 재시도 (클리핑 금지)

한국어 주석 포함.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Protocol, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from config import settings
from src.engine.errors import SimulationError
from src.engine.reactor import Mixture

logger = logging.getLogger(__name__)

RTOL_MIN = 1e-10
RTOL_MAX = 1e-4

RateFunction = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Tolerances:
    rtol: float = settings.RTOL
    atol: Optional[float] = None

    def __post_init__(self) -> None:
        if not RTOL_MIN <= self.rtol <= RTOL_MAX:
            raise ValueError(f"rtol 은 [{RTOL_MIN}, {RTOL_MAX}] 범위여야 합니다: {self.rtol}")
        if self.atol is not None and not self.atol > 0.0:
            raise ValueError(f"atol 은 양수여야 합니다: {self.atol}")

    @property
    def absolute(self) -> float:
        return self.atol if self.atol is not None else self.rtol * settings.ATOL_SCALE_M


class KineticSystem(Protocol):
    """혼합물 <-> 상태벡터 변환과 속도식을 제공하는 모델"""

    def state_vector(self, mix: Mixture) -> np.ndarray:
        ...

    def with_state(self, mix: Mixture, y: np.ndarray) -> Mixture:
        ...

    def rate_functions(self, mix: Mixture) -> Tuple[RateFunction, RateFunction]:
        """(rhs(t, y), jac(t, y)). 풀(pool) 농도는 mix 에서 고정"""
        ...


def integrate_ode(
    rhs: RateFunction,
    y0: np.ndarray,
    duration_s: float,
    offsets_s: Sequence[float],
    tolerances: Tolerances = Tolerances(),
    jac: Optional[RateFunction] = None,
    nonnegative: bool = True,
) -> np.ndarray:
    """[0, duration] 적분 후 offsets 시각의 상태 (행: 시각, 열: 성분).

    Raises:
        SimulationError: 적분 실패 또는 재시도 후에도 음수 언더슈트
    """
    y0 = np.asarray(y0, dtype=float)
    t_eval = np.asarray(offsets_s, dtype=float)
    if duration_s == 0.0:
        return np.tile(y0, (len(t_eval), 1))
    if duration_s < 0.0:
        raise ValueError(f"적분 구간은 0 이상이어야 합니다: {duration_s}")

    rtol = tolerances.rtol
    atol = tolerances.absolute
    for attempt in range(settings.INTEGRATOR_RETRIES + 1):
        sol = solve_ivp(
            rhs,
            (0.0, duration_s),
            y0,
            method="BDF",
            jac=jac,
            rtol=rtol,
            atol=atol,
            dense_output=True,
        )
        if sol.status < 0:
            raise SimulationError(f"적분 실패: {sol.message}")
        steps = sol.y
        if not np.all(np.isfinite(steps)):
            raise SimulationError("적분 결과에 유한하지 않은 값이 있습니다")
        ys = sol.sol(t_eval).T.reshape(len(t_eval), len(y0)) if t_eval.size else np.empty((0, len(y0)))
        # 샘플 시각뿐 아니라 모든 적분 스텝에서 검사
        lowest = min(steps.min(initial=0.0), ys.min(initial=0.0))
        if not nonnegative or lowest >= -settings.NEGATIVE_TOL_M:
            return ys
        logger.warning(
            f"음수 언더슈트 {lowest:.3e} M, rtol {rtol:.1e} -> {rtol / 10:.1e} 재시도 ({attempt + 1})"
        )
        rtol /= 10.0
        atol /= 10.0
    raise SimulationError(f"재시도 후에도 음수 농도: {lowest:.3e} M")


def integrate_interval(
    mix: Mixture,
    system: KineticSystem,
    duration_s: float,
    tolerances: Tolerances = Tolerances(),
    offsets_s: Optional[Sequence[float]] = None,
) -> List[Mixture]:
    """혼합물을 duration 동안 진화시키고 각 샘플 시각의 혼합물 목록을 반환한다.

    offsets 를 주지 않으면 구간 끝 상태 하나만 반환한다.
    """
    offsets = [duration_s] if offsets_s is None else list(offsets_s)
    if duration_s == 0.0:
        return [mix] * len(offsets)
    rhs, jac = system.rate_functions(mix)
    ys = integrate_ode(rhs, system.state_vector(mix), duration_s, offsets, tolerances, jac)
    return [system.with_state(mix, y) for y in ys]
