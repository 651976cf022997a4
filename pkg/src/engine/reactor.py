"""
반자유(semi-batch) 단일 용기 반응기 엔진

- 혼합물 상태(Mixture) 유지
- 일정 간격(tau)마다 기호 aliquot 주입 (희석 포함)
- 주입 사이의 시간 변화는 화학 모델에 위임
- 궤적(Trajectory) 기록, 진행 중 reject 고정(pin)

한국어 주석 포함.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Mapping, Optional, Protocol, Tuple

import numpy as np

from config import settings
from src.automata.formal import Language, Symbol, Verdict, Word
from src.engine.errors import ConfigError, SimulationError, WordError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Mixture:
    """반응기 혼합물 상태.

    concentrations: 화학종 -> mol/dm3 (고체는 현탁액 부피 기준 농도로 보관)
    cumulative_heat_kJ: 누적 방출열 (발열 반응이면 양수)
    """

    concentrations: Mapping[str, float]
    volume_dm3: float
    temperature_K: float = settings.TEMPERATURE_K
    cumulative_heat_kJ: float = 0.0

    def __post_init__(self) -> None:
        conc = {k: float(v) for k, v in self.concentrations.items()}
        object.__setattr__(self, "concentrations", conc)
        if not (self.volume_dm3 > 0.0 and math.isfinite(self.volume_dm3)):
            raise ValueError(f"부피는 양수여야 합니다: {self.volume_dm3}")
        if not self.temperature_K > 0.0:
            raise ValueError(f"온도는 양수여야 합니다: {self.temperature_K}")
        if not math.isfinite(self.cumulative_heat_kJ):
            raise ValueError("누적 열량이 유한하지 않습니다")
        for species, value in conc.items():
            if not math.isfinite(value) or value < -settings.NEGATIVE_TOL_M:
                raise ValueError(f"농도 오류: [{species}] = {value}")

    def conc(self, species: str) -> float:
        return self.concentrations.get(species, 0.0)

    def moles(self, species: str) -> float:
        return self.conc(species) * self.volume_dm3

    @property
    def reaction_enthalpy_kJ(self) -> float:
        """부호 있는 반응 엔탈피 누계 (발열이면 음수)"""
        return -self.cumulative_heat_kJ

    def with_concentrations(self, updates: Mapping[str, float]) -> "Mixture":
        conc = dict(self.concentrations)
        conc.update(updates)
        return replace(self, concentrations=conc)

    def add_heat(self, heat_kJ: float) -> "Mixture":
        return replace(self, cumulative_heat_kJ=self.cumulative_heat_kJ + heat_kJ)


@dataclass(frozen=True)
class AliquotEntry:
    """한 기호에 해당하는 aliquot: 화학종별 몰수와 부피.

    inert=True 이면 엔탈피 수율 분모에서 제외한다 (지시약).
    """

    amounts_mol: Mapping[str, float]
    volume_dm3: float
    inert: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "amounts_mol", {k: float(v) for k, v in self.amounts_mol.items()})
        if not (self.volume_dm3 > 0.0 and math.isfinite(self.volume_dm3)):
            raise ValueError(f"aliquot 부피는 양수여야 합니다: {self.volume_dm3}")
        for species, amount in self.amounts_mol.items():
            if not math.isfinite(amount):
                raise ValueError(f"aliquot 몰수가 유한하지 않습니다: {species}={amount}")
            if amount < 0.0:
                raise ValueError(f"aliquot 몰수는 0 이상이어야 합니다: {species}={amount}")


@dataclass(frozen=True)
class AliquotRecipe:
    """기호별 aliquot 레시피"""

    recipe_id: str
    language: Language
    entries: Mapping[Symbol, AliquotEntry]

    def entry(self, symbol: Symbol) -> AliquotEntry:
        try:
            return self.entries[symbol]
        except KeyError:
            raise ConfigError(
                f"레시피 '{self.recipe_id}' 에 기호 '{symbol.value}' 의 aliquot 이 없습니다"
            ) from None

    def reactive_species(self) -> List[str]:
        """불활성이 아닌 aliquot 의 화학종 (수율 분모에 들어가는 입력)"""
        return sorted({s for e in self.entries.values() if not e.inert for s in e.amounts_mol})

    def scaled(self, symbol: Symbol, factor: float, recipe_id: Optional[str] = None) -> "AliquotRecipe":
        """한 기호의 몰수를 factor 배 한 새 레시피 (튜닝용)"""
        entries = dict(self.entries)
        old = entries[symbol]
        entries[symbol] = AliquotEntry(
            {k: v * factor for k, v in old.amounts_mol.items()}, old.volume_dm3, old.inert
        )
        return AliquotRecipe(recipe_id or self.recipe_id, self.language, entries)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "recipe_id": self.recipe_id,
            "language": self.language.value,
            "aliquots": {
                sym.value: {
                    "volume_dm3": e.volume_dm3,
                    "inert": e.inert,
                    "amount_mol": dict(sorted(e.amounts_mol.items())),
                }
                for sym, e in sorted(self.entries.items(), key=lambda kv: kv[0].value)
            },
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "AliquotRecipe":
        lookup = {s.value: s for s in Symbol}
        entries = {}
        for key, raw in data.get("aliquots", {}).items():
            if key not in lookup:
                raise ConfigError(f"알 수 없는 기호 키: '{key}'")
            entries[lookup[key]] = AliquotEntry(
                raw.get("amount_mol", {}), float(raw["volume_dm3"]), bool(raw.get("inert", False))
            )
        return cls(str(data.get("recipe_id", "custom")), Language(data["language"]), entries)


@dataclass(frozen=True)
class FeedSchedule:
    """주입 스케줄. 기호 i 는 t = i * tau 에 주입되고 '#' 은 t_# = tau * len(word)."""

    word: Word
    interval_s: float = settings.TAU_S
    end_marker: bool = True
    sample_dt_s: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.interval_s > settings.TRANSIENT_DISCARD_S:
            raise ValueError(
                f"tau({self.interval_s}s) 는 {settings.TRANSIENT_DISCARD_S}s 보다 커야 합니다"
            )
        if self.sample_dt_s is not None and not 0.0 < self.sample_dt_s <= self.interval_s:
            raise ValueError(f"샘플 간격 오류: {self.sample_dt_s}")

    @property
    def t_end_marker_s(self) -> float:
        return self.interval_s * self.word.length

    @property
    def tau_prime_s(self) -> float:
        return self.interval_s - settings.TRANSIENT_DISCARD_S

    @property
    def feed(self) -> Tuple[Symbol, ...]:
        return self.word.symbols + ((Symbol.END,) if self.end_marker else ())

    @property
    def duration_s(self) -> float:
        return self.interval_s * max(1, len(self.feed))


@dataclass(frozen=True)
class Injection:
    time_s: float
    symbol: Symbol
    sample_index: int
    heat_before_kJ: float = 0.0


@dataclass
class Trajectory:
    """시간순 샘플 (t, 혼합물, 관측값) 과 주입 기록"""

    times: List[float] = field(default_factory=list)
    mixtures: List[Mixture] = field(default_factory=list)
    observables: List[Dict[str, Any]] = field(default_factory=list)
    injections: List[Injection] = field(default_factory=list)
    pinned: Optional[Verdict] = None
    initial: Optional[Mixture] = None

    def append(self, t: float, mix: Mixture, obs: Dict[str, Any]) -> int:
        if self.times and not t > self.times[-1]:
            raise ValueError(f"샘플 시간은 증가해야 합니다: {self.times[-1]} -> {t}")
        self.times.append(float(t))
        self.mixtures.append(mix)
        self.observables.append(obs)
        return len(self.times) - 1

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final(self) -> Mixture:
        return self.mixtures[-1]

    def time_array(self) -> np.ndarray:
        return np.asarray(self.times, dtype=float)

    def species_names(self) -> List[str]:
        names = set()
        for mix in self.mixtures:
            names.update(mix.concentrations)
        return sorted(names)

    def observable_names(self) -> List[str]:
        return list(self.observables[0].keys()) if self.observables else []

    def column(self, name: str) -> np.ndarray:
        """관측값 또는 화학종 농도 열을 배열로 반환"""
        if self.observables and name in self.observables[0]:
            return np.asarray([o[name] for o in self.observables])
        return np.asarray([m.conc(name) for m in self.mixtures], dtype=float)

    def post_injection(self) -> List[Tuple[Injection, Dict[str, Any]]]:
        return [(inj, self.observables[inj.sample_index]) for inj in self.injections]


class ChemistryModel(Protocol):
    """반응기에 연결되는 화학 모델 인터페이스"""

    language: Language

    def react(self, mix: Mixture, symbol: Symbol) -> Mixture:
        """주입 직후의 순간 반응 (평형 등)"""
        ...

    def evolve(self, mix: Mixture, duration_s: float, offsets_s: np.ndarray) -> List[Mixture]:
        """주입 사이 시간 변화. offsets_s 각 시각의 상태 목록 (마지막 = duration_s)"""
        ...

    def observe(self, mix: Mixture) -> Dict[str, Any]:
        ...

    def check_symbol(self, traj: Trajectory) -> Optional[Verdict]:
        """진행 중 reject 감지 (감지되면 판정이 고정된다)"""
        ...

    def verdict(self, traj: Trajectory, schedule: FeedSchedule) -> Verdict:
        ...

    def sample_dt(self, schedule: FeedSchedule) -> float:
        ...

    def describe(self, traj: Trajectory, schedule: FeedSchedule) -> Dict[str, Any]:
        """결과 요약에 들어갈 모델별 지표"""
        ...


def inject_aliquot(mix: Mixture, aliquot: AliquotEntry) -> Mixture:
    """aliquot 주입: 기존 농도는 V/V' 로 희석, 주입 화학종은 amount/V' 만큼 증가.

    Raises:
        ValueError: 부피가 0 이하이거나 몰수가 유한하지 않음
    """
    if not aliquot.volume_dm3 > 0.0:
        raise ValueError(f"aliquot 부피는 양수여야 합니다: {aliquot.volume_dm3}")
    new_volume = mix.volume_dm3 + aliquot.volume_dm3
    ratio = mix.volume_dm3 / new_volume
    conc = {k: v * ratio for k, v in mix.concentrations.items()}
    for species, amount in aliquot.amounts_mol.items():
        if not math.isfinite(amount):
            raise ValueError(f"aliquot 몰수가 유한하지 않습니다: {species}={amount}")
        conc[species] = conc.get(species, 0.0) + amount / new_volume
    return replace(mix, concentrations=conc, volume_dm3=new_volume)


def _sample_offsets(interval_s: float, dt: float) -> np.ndarray:
    n = int(round(interval_s / dt))
    offsets = [k * dt for k in range(1, n + 1) if k * dt < interval_s - 1e-9]
    offsets.append(interval_s)
    return np.asarray(offsets, dtype=float)


def _check_word(model: ChemistryModel, recipe: AliquotRecipe, schedule: FeedSchedule) -> None:
    if recipe.language is not model.language:
        raise ConfigError(
            f"레시피 언어({recipe.language.value}) 와 모델 언어({model.language.value}) 가 다릅니다"
        )
    alphabet = model.language.alphabet
    for pos, s in enumerate(schedule.word.symbols):
        if s not in alphabet:
            raise WordError(f"{model.language.value} 알파벳 밖의 기호 '{s.value}' (위치 {pos})")
    for s in schedule.feed:
        recipe.entry(s)


def simulate(
    model: ChemistryModel, recipe: AliquotRecipe, schedule: FeedSchedule, initial: Mixture
) -> Trajectory:
    """주입-진화를 반복하여 궤적을 만든다 (판정 없이).

    진행 중 reject 가 감지되어도 적분은 t_# + tau 까지 계속한다.

    Raises:
        SimulationError: 모델 적분 실패 (partial 에 그때까지의 궤적)
    """
    _check_word(model, recipe, schedule)
    traj = Trajectory(initial=initial)
    dt = model.sample_dt(schedule)
    offsets = _sample_offsets(schedule.interval_s, dt)
    feed = schedule.feed
    mix = initial

    if not feed:
        traj.append(0.0, mix, model.observe(mix))

    for i in range(max(1, len(feed))):
        t0 = i * schedule.interval_s
        if feed:
            symbol = feed[i]
            heat_before = mix.cumulative_heat_kJ
            mix = model.react(inject_aliquot(mix, recipe.entry(symbol)), symbol)
            idx = traj.append(t0, mix, model.observe(mix))
            traj.injections.append(Injection(t0, symbol, idx, heat_before))
            logger.debug(f"t={t0:.1f}s '{symbol.value}' 주입, V={mix.volume_dm3:.4f} dm3")
            if traj.pinned is None:
                traj.pinned = model.check_symbol(traj)
                if traj.pinned is not None:
                    logger.debug(f"진행 중 reject 고정: {traj.pinned.label()}")

        try:
            states = model.evolve(mix, schedule.interval_s, offsets)
        except SimulationError as e:
            raise SimulationError(f"t={t0:.1f}s 구간 적분 실패: {e}", partial=traj) from e

        last = i == max(1, len(feed)) - 1
        keep = len(offsets) if last else len(offsets) - 1
        for off, state in zip(offsets[:keep], states[:keep]):
            traj.append(t0 + off, state, model.observe(state))
        mix = states[-1]

    return traj


def run_word(
    model: ChemistryModel, recipe: AliquotRecipe, schedule: FeedSchedule, initial: Mixture
) -> Tuple[Trajectory, Verdict]:
    """단어 하나를 반응기에서 실행하고 (궤적, 최종 판정) 을 반환한다.

    진행 중 고정된 reject 가 있으면 그것이 최종 판정이다.
    """
    traj = simulate(model, recipe, schedule, initial)
    verdict = traj.pinned if traj.pinned is not None else model.verdict(traj, schedule)
    logger.info(f"[{model.language.value}] '{schedule.word}' -> {verdict.label()}")
    return traj, verdict


def symbol_heat_costs(traj: Trajectory) -> List[Tuple[Symbol, float]]:
    """기호별 방출열 (주입 시점 사이 누적열 차이, 마지막은 궤적 끝까지)"""
    costs: List[Tuple[Symbol, float]] = []
    injections = traj.injections
    for k, inj in enumerate(injections):
        if k + 1 < len(injections):
            after = injections[k + 1].heat_before_kJ
        else:
            after = traj.final.cumulative_heat_kJ
        costs.append((inj.symbol, after - inj.heat_before_kJ))
    return costs


def total_injected_moles(recipe: AliquotRecipe, feed: Iterable[Symbol], include_inert: bool = True) -> Dict[str, float]:
    """피드 전체로 들어간 화학종별 몰수"""
    totals: Dict[str, float] = {}
    for symbol in feed:
        entry = recipe.entry(symbol)
        if entry.inert and not include_inert:
            continue
        for species, amount in entry.amounts_mol.items():
            totals[species] = totals.get(species, 0.0) + amount
    return totals
