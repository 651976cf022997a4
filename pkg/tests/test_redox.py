"""
Nernst 전위 / 면적 지표 테스트
"""

import math

import numpy as np
import pytest

from config import settings
from src.automata.formal import Language, Symbol, Word
from src.engine.errors import ConsistencyError
from src.engine.reactor import FeedSchedule, Injection, Mixture, Trajectory
from src.engine.redox import (
    RedoxObservables,
    area_over_window,
    area_word,
    gibbs_energy,
    nernst_clamped,
    nernst_potential,
    symbol_area_costs,
)


@pytest.fixture
def obs():
    return RedoxObservables.for_catalyst(0.05)


@pytest.mark.unit
class TestNernst:
    def test_slope(self, obs):
        """RT/F 는 298.15 K 에서 약 25.69 mV"""
        assert obs.slope_volt == pytest.approx(0.025693, rel=1e-4)

    def test_equal_concentrations_give_v0(self, obs):
        assert nernst_potential(0.01, 0.01, obs) == pytest.approx(settings.V0_VOLT)

    def test_decade_shift(self, obs):
        v1 = nernst_potential(0.01, 0.001, obs)
        v0 = nernst_potential(0.001, 0.001, obs)
        assert v1 - v0 == pytest.approx(obs.slope_volt * math.log(10.0))

    def test_floor_and_clamp_flag(self, obs):
        assert nernst_clamped(0.0, 0.01)
        assert not nernst_clamped(1e-3, 0.01)
        expected = settings.V0_VOLT + obs.slope_volt * math.log(settings.NERNST_FLOOR_M / 0.01)
        assert nernst_potential(0.0, 0.01, obs) == pytest.approx(expected)

    def test_v_max(self, obs):
        eps = settings.CATALYST_EPS_M
        expected = settings.V0_VOLT + obs.slope_volt * math.log((0.05 - eps) / eps)
        assert obs.v_max == pytest.approx(expected)

    def test_gibbs(self, obs):
        assert gibbs_energy(1.0, obs) == pytest.approx(-settings.FARADAY)
        assert gibbs_energy(np.array([0.5, 1.0]), obs)[0] == pytest.approx(-0.5 * settings.FARADAY)

    def test_invalid_observables(self):
        with pytest.raises(ValueError):
            RedoxObservables(catalyst_total_M=0.0)
        with pytest.raises(ValueError):
            RedoxObservables(catalyst_total_M=0.05, n_electrons=0)


@pytest.mark.unit
class TestAreaMetric:
    def test_constant_potential(self, obs):
        times = np.arange(0.0, 301.0, 0.5)
        v = np.full_like(times, obs.v_max - 0.1)
        metric = area_over_window(times, v, 30.0, 300.0, obs)
        assert metric.tau_prime_s == 270.0
        assert metric.area_Vs == pytest.approx(27.0)
        assert metric.area_gibbs_Vs == pytest.approx(metric.area_Vs, rel=1e-9)

    def test_fully_oxidized_zero_area(self, obs):
        times = np.linspace(0.0, 300.0, 601)
        metric = area_over_window(times, np.full_like(times, obs.v_max), 30.0, 300.0, obs)
        assert metric.area_Vs == pytest.approx(0.0, abs=1e-9)

    def test_window_endpoints_interpolated(self, obs):
        """샘플이 구간 끝에 없어도 선형 보간으로 정확히 적분"""
        times = np.array([0.0, 17.0, 101.0, 333.0])
        v = 1.0 + 0.001 * times
        metric = area_over_window(times, v, 30.0, 300.0, obs)
        integral = 270.0 + 0.001 * (300.0 ** 2 - 30.0 ** 2) / 2.0
        assert metric.area_Vs == pytest.approx(obs.v_max * 270.0 - integral, rel=1e-12)

    def test_window_not_covered(self, obs):
        times = np.linspace(0.0, 200.0, 11)
        with pytest.raises(ValueError):
            area_over_window(times, np.ones_like(times), 30.0, 300.0, obs)

    def test_consistency_error_type(self):
        assert issubclass(ConsistencyError, RuntimeError)


def _linear_trajectory(text):
    """V = 1.0 + 1e-4 t 로 1 s 마다 샘플, 기호는 tau 마다 주입"""
    schedule = FeedSchedule(Word.parse(text, Language.L3))
    traj = Trajectory()
    for t in np.arange(0.0, schedule.duration_s + 0.5, 1.0):
        traj.append(t, Mixture({}, 1.0), {"V_volt": 1.0 + 1e-4 * t})
    for i, symbol in enumerate(schedule.feed):
        t = i * schedule.interval_s
        traj.injections.append(Injection(t, symbol, int(t)))
    return traj, schedule


@pytest.mark.unit
class TestWordArea:
    def test_area_word_uses_end_marker_window(self, obs):
        traj, schedule = _linear_trajectory("ab")
        metric = area_word(traj, schedule, obs)
        start, end = 630.0, 900.0
        integral = (end - start) + 1e-4 * (end ** 2 - start ** 2) / 2.0
        assert metric.area_Vs == pytest.approx(obs.v_max * 270.0 - integral, rel=1e-12)

    def test_symbol_costs_last_equals_area_word(self, obs):
        traj, schedule = _linear_trajectory("ab")
        costs = symbol_area_costs(traj, schedule, obs)
        assert [s for s, _ in costs] == [Symbol.A, Symbol.B, Symbol.END]
        # V 가 증가하므로 뒤 구간일수록 면적이 작다
        areas = [a for _, a in costs]
        assert areas[0] > areas[1] > areas[2]
        assert areas[-1] == pytest.approx(area_word(traj, schedule, obs).area_Vs)
