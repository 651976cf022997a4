"""
침전 FA (L1) 테스트
"""

import math

import pytest

from config import settings
from src.automata.formal import Language, RejectKind, Verdict, Word
from src.engine.chem_fa import (
    PrecipitationModel,
    default_fa_initial,
    default_fa_recipe,
    equilibrate_precipitation,
    fa_verdict,
    precipitated_concentration,
)
from src.engine.errors import ConsistencyError
from src.engine.reactor import FeedSchedule, Mixture, Trajectory, run_word
from src.engine.thermo import ThermoDB


def _run(text, model=None):
    model = model or PrecipitationModel.from_thermo(ThermoDB.load())
    return run_word(model, default_fa_recipe(), FeedSchedule(Word.parse(text, Language.L1)), default_fa_initial())


@pytest.mark.unit
class TestPrecipitationEquilibrium:
    def test_below_ksp_no_solid(self):
        assert precipitated_concentration(1e-5, 1e-5, settings.KSP_AGIO3) == 0.0

    def test_equal_concentrations(self):
        """c = a 이면 x = c - sqrt(Ksp)"""
        c = 1.0 / 120.0
        x = precipitated_concentration(c, c, settings.KSP_AGIO3)
        assert x == pytest.approx(c - math.sqrt(settings.KSP_AGIO3), rel=1e-12)

    def test_residual_product_equals_ksp(self):
        c, a = 0.02, 0.005
        x = precipitated_concentration(c, a, settings.KSP_AGIO3)
        assert (c - x) * (a - x) == pytest.approx(settings.KSP_AGIO3, rel=1e-8)
        assert 0.0 < x < a

    def test_equilibrate_adds_heat(self):
        model = PrecipitationModel()
        mix = Mixture({"Ag+": 0.01, "IO3-": 0.01}, 0.1)
        out = equilibrate_precipitation(mix, model)
        solid_mol = out.moles(model.solid)
        assert out.cumulative_heat_kJ == pytest.approx(55.4 * solid_mol)
        assert out.moles("Ag+") + solid_mol == pytest.approx(0.001)

    def test_invalid_ksp(self):
        with pytest.raises(ValueError):
            PrecipitationModel(ksp=0.0)


@pytest.mark.unit
class TestFAVerdicts:
    def test_ab_accepts(self):
        traj, verdict = _run("ab")
        assert verdict == Verdict.accept()
        # 0.001 mol 씩 0.12 dm3 에서 만나므로 거의 전부 침전
        solid = traj.final.moles("AgIO3(s)")
        assert solid == pytest.approx(0.001 - 0.12 * math.sqrt(settings.KSP_AGIO3), rel=1e-6)
        assert traj.final.cumulative_heat_kJ == pytest.approx(55.4 * solid, rel=1e-9)

    @pytest.mark.parametrize("text", ["a", "bbbb", "aaa"])
    def test_single_reagent_rejects(self, text):
        traj, verdict = _run(text)
        assert verdict == Verdict.reject(RejectKind.NO_REACTION)
        assert traj.final.cumulative_heat_kJ == 0.0

    def test_order_does_not_matter(self):
        _, v1 = _run("aab")
        _, v2 = _run("baa")
        assert v1 == v2 == Verdict.accept()

    def test_describe(self):
        model = PrecipitationModel()
        schedule = FeedSchedule(Word.parse("ba", Language.L1))
        traj, _ = run_word(model, default_fa_recipe(), schedule, default_fa_initial())
        summary = model.describe(traj, schedule)
        assert summary["precipitate_mol"] > settings.VISIBILITY_MOL
        assert summary["heat_kJ"] > 0.0

    def test_inconsistent_signals(self):
        """침전은 있는데 열이 없으면 ConsistencyError"""
        model = PrecipitationModel()
        traj = Trajectory()
        traj.append(0.0, Mixture({model.solid: 0.01}, 1.0), {})
        with pytest.raises(ConsistencyError):
            fa_verdict(traj, model)
