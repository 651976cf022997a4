"""
BZ 진동자 TM (L3) 테스트
"""

import numpy as np
import pytest

from src.automata.formal import Language, RejectKind, Symbol, Verdict, Word
from src.engine.chem_tm import (
    BROMATE,
    CATALYST,
    HYDROXIDE,
    PROTON,
    BZModel,
    Pools,
    RejectSignature,
    TMCalibration,
    bz_derivatives,
    bz_jacobian,
    default_tm_initial,
    default_tm_recipe,
    infer_pathway,
    ledger_order_violated,
    neutralize_acid,
    oscillation_period,
    tm_verdict,
)
from src.engine.errors import ConfigError
from src.engine.features import OscillationDescriptors
from src.engine.integrator import Tolerances
from src.engine.reactor import FeedSchedule, Trajectory, inject_aliquot, run_word, simulate
from src.engine.redox import AreaMetric


def _desc(freq=0.02, amp=0.01):
    return OscillationDescriptors(freq, amp, 5, 0.1, 0.09, False)


def _area(value):
    return AreaMetric(value, value, 930.0, 1200.0, 270.0, 1.45)


@pytest.mark.unit
class TestKinetics:
    def test_jacobian_matches_finite_differences(self):
        model = BZModel()
        coeff = model.coefficients(Pools.from_mixture(default_tm_initial()))
        y = np.array([2e-5, 3e-7, 4e-3])
        jac = bz_jacobian(y, coeff)
        numeric = np.zeros((3, 3))
        for j in range(3):
            h = 1e-6 * max(abs(y[j]), 1e-12)
            up, down = y.copy(), y.copy()
            up[j] += h
            down[j] -= h
            numeric[:, j] = (bz_derivatives(up, coeff) - bz_derivatives(down, coeff)) / (2.0 * h)
        assert jac == pytest.approx(numeric, rel=1e-5, abs=1e-9)

    def test_pools_enter_rate_coefficients(self):
        model = BZModel()
        pools = Pools(0.06, 0.1, 0.8, 0.05)
        coeff = model.coefficients(pools)
        assert coeff.ka3 == pytest.approx(model.k3 * 0.8 * 0.06)
        assert coeff.kb == pytest.approx(model.kc * 0.1)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            BZModel(k2=0.0)
        with pytest.raises(ValueError):
            BZModel(f=5.0)


@pytest.mark.unit
class TestLedger:
    def test_neutralization_heat(self):
        """c aliquot: OH- 0.004 mol 이 H+ 를 중화하고 |dH| * n 만큼 열을 낸다"""
        recipe = default_tm_recipe()
        mix = inject_aliquot(default_tm_initial(), recipe.entry(Symbol.C))
        out = neutralize_acid(mix, -55.89)
        assert out.moles(HYDROXIDE) == pytest.approx(0.0, abs=1e-15)
        assert out.moles(PROTON) == pytest.approx(0.08 - 0.004)
        assert out.cumulative_heat_kJ == pytest.approx(55.89 * 0.004)

    def test_infer_pathway(self):
        recipe = default_tm_recipe()
        mix = default_tm_initial()
        for symbol in (Symbol.A, Symbol.B, Symbol.C, Symbol.END):
            after = BZModel().react(inject_aliquot(mix, recipe.entry(symbol)), symbol)
            assert infer_pathway(mix, after) is symbol
        assert infer_pathway(mix, mix) is None

    @pytest.mark.parametrize(
        "symbols, violated",
        [
            ([Symbol.A, Symbol.B, Symbol.C, Symbol.END], False),
            ([Symbol.A, Symbol.A, Symbol.C, Symbol.END], False),
            ([Symbol.B, Symbol.A, Symbol.END], True),
            ([Symbol.A, Symbol.C, Symbol.B, Symbol.END], True),
            ([Symbol.END], True),
        ],
    )
    def test_order_violation(self, symbols, violated):
        assert ledger_order_violated(symbols) is violated


@pytest.mark.unit
class TestCalibration:
    def test_band_and_side(self):
        calib = TMCalibration(100.0, 5.0)
        assert calib.band == (95.0, 105.0)
        assert calib.contains(104.0)
        assert calib.side(104.0) == "on"
        assert calib.side(120.0) == "above"
        assert calib.side(80.0) == "below"

    def test_fallback_classification(self):
        """시그니처가 없으면 밴드 위/아래로 ExcessA / ExcessC"""
        calib = TMCalibration(100.0, 5.0, excess_a_side="below")
        assert calib.classify(100.0, _desc()) == Verdict.accept()
        assert calib.classify(80.0, _desc()).reject_kind is RejectKind.EXCESS_A
        assert calib.classify(120.0, _desc()).reject_kind is RejectKind.EXCESS_C

    def test_nearest_signature(self):
        """밴드 밖 면적은 가장 가까운 기준 시그니처의 종류"""
        calib = TMCalibration(
            100.0,
            5.0,
            signatures=(
                RejectSignature(RejectKind.EXCESS_A, (0.3, 1.0, 0.0), "aaabbcc"),
                RejectSignature(RejectKind.EXCESS_B, (-0.2, 1.0, 0.0), "aabbbcc"),
                RejectSignature(RejectKind.EXCESS_C, (-0.3, 2.0, 0.0), "aabbccc"),
            ),
            scales={"area": 100.0, "frequency": 0.02, "amplitude": 0.01},
        )
        assert calib.classify(128.0, _desc(0.02, 0.0)).reject_kind is RejectKind.EXCESS_A
        assert calib.classify(80.0, _desc(0.02, 0.0)).reject_kind is RejectKind.EXCESS_B
        assert calib.classify(70.0, _desc(0.04, 0.0)).reject_kind is RejectKind.EXCESS_C
        assert calib.nearest_signature(80.0, _desc(0.02, 0.0)).word == "aabbbcc"

    def test_dict_form(self):
        calib = TMCalibration(
            50.0, 2.0, "above", (RejectSignature(RejectKind.EXCESS_B, (0.1, 0.2, 0.3), "abbcc"),), {"area": 50.0}
        )
        assert TMCalibration.from_dict(calib.to_dict()) == calib

    def test_invalid_calibration(self):
        with pytest.raises(ConfigError):
            TMCalibration.from_dict({"half_width_Vs": 1.0})
        with pytest.raises(ConfigError):
            TMCalibration(1.0, -1.0)
        with pytest.raises(ConfigError):
            TMCalibration(1.0, 1.0, excess_a_side="left")

    def test_verdict_requires_calibration(self):
        with pytest.raises(ConfigError):
            tm_verdict(Trajectory(), _desc(), _area(10.0), None)

    def test_pinned_verdict_wins(self):
        traj = Trajectory(pinned=Verdict.reject(RejectKind.BAD_ORDER))
        calib = TMCalibration(10.0, 1.0)
        assert tm_verdict(traj, _desc(), _area(10.0), calib).reject_kind is RejectKind.BAD_ORDER


def _schedule(text):
    return FeedSchedule(Word.parse(text, Language.L3))


@pytest.mark.slow
class TestBZSimulation:
    def test_bad_order_pinned_without_calibration(self):
        """순서 위반은 풀 장부로 고정되므로 보정값 없이도 판정된다"""
        _, verdict = run_word(BZModel(), default_tm_recipe(), _schedule("ba"), default_tm_initial())
        assert verdict == Verdict.reject(RejectKind.BAD_ORDER)

    def test_empty_word_is_bad_order(self):
        _, verdict = run_word(BZModel(), default_tm_recipe(), _schedule(""), default_tm_initial())
        assert verdict.reject_kind is RejectKind.BAD_ORDER

    def test_trajectory_invariants(self):
        model = BZModel()
        schedule = _schedule("abc")
        traj = simulate(model, default_tm_recipe(), schedule, default_tm_initial())
        v_max = model.redox(traj.final).v_max
        assert traj.column("V_volt").max() < v_max
        assert traj.column("Ru3+").min() >= -1e-12
        # 풀 농도는 주입 사이에 일정
        bromate = traj.column(BROMATE)
        last = traj.injections[-1].sample_index
        assert np.ptp(bromate[last:]) == pytest.approx(0.0, abs=1e-15)
        assert traj.final.conc(CATALYST) > default_tm_initial().conc(CATALYST) * 0.9

    def test_oscillates_after_end_marker(self):
        model = BZModel()
        schedule = _schedule("abc")
        traj = simulate(model, default_tm_recipe(), schedule, default_tm_initial())
        summary = model.describe(traj, schedule)
        assert summary["frequency_Hz"] > 0.0
        assert summary["peak_count"] >= 2
        assert summary["area_Vs"] == pytest.approx(summary["area_gibbs_Vs"], rel=1e-6)
        assert "locus_side" not in summary

    def test_deterministic(self):
        model = BZModel()
        schedule = _schedule("aabbcc")
        t1 = simulate(model, default_tm_recipe(), schedule, default_tm_initial())
        t2 = simulate(model, default_tm_recipe(), schedule, default_tm_initial())
        assert np.array_equal(t1.column("V_volt"), t2.column("V_volt"))

    def test_period_converges_with_rtol(self):
        """rtol 1e-6 과 1e-10 의 주기가 0.1% 안에서 같다"""
        model = BZModel()
        mix = default_tm_initial()
        p1 = oscillation_period(model, mix, 900.0, Tolerances(rtol=1e-6))
        p2 = oscillation_period(model, mix, 900.0, Tolerances(rtol=1e-10))
        assert p1 > 0.0
        assert p2 == pytest.approx(p1, rel=1e-3)
