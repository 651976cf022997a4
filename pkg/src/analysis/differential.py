"""
오라클 차분 테스트

- 열거된 모든 단어를 화학 시뮬레이션과 형식 오라클로 판정
- 불일치(시뮬레이션 오류 포함)를 행 단위로 기록
- --jobs N: 프로세스 풀에서 단어별 병렬 실행 (결과 순서는 입력 순서 유지)

한국어 주석 포함.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from config import settings
from src.automata.formal import Language, Verdict, Word, curated_l3_words, enumerate_words, recognize
from src.engine.errors import ConsistencyError, NumericalError, SimulationError
from src.engine.reactor import AliquotRecipe, ChemistryModel, FeedSchedule, Mixture, run_word

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DifferentialRow:
    word: str
    oracle: Verdict
    chemical: Optional[Verdict]
    diagnostic: Optional[str] = None

    @property
    def match(self) -> bool:
        return self.chemical is not None and self.chemical == self.oracle

    def csv_row(self) -> Tuple[str, str, str, bool]:
        chem = self.chemical.label() if self.chemical else "Error"
        return (self.word, self.oracle.label(), chem, self.match)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "word": self.word,
            "oracle": self.oracle.to_dict(),
            "chemical": self.chemical.to_dict() if self.chemical else None,
            "match": self.match,
            "diagnostic": self.diagnostic,
        }


@dataclass
class DifferentialReport:
    language: Language
    max_len: Optional[int]
    rows: List[DifferentialRow] = field(default_factory=list)
    runtime_s: float = 0.0

    @property
    def mismatch_count(self) -> int:
        return sum(1 for r in self.rows if not r.match)

    @property
    def mismatches(self) -> List[DifferentialRow]:
        return [r for r in self.rows if not r.match]

    def csv_rows(self) -> List[Tuple[str, str, str, bool]]:
        return [r.csv_row() for r in self.rows]

    def to_dict(self, timing: bool = False) -> Dict[str, Any]:
        out = {
            "schema_version": settings.SCHEMA_VERSION,
            "language": self.language.value,
            "max_len": self.max_len,
            "word_count": len(self.rows),
            "mismatch_count": self.mismatch_count,
            "mismatches": [r.to_dict() for r in self.mismatches],
        }
        if timing:
            out["runtime_s"] = self.runtime_s
        return out


def suite_words(language: Language, max_len: Optional[int] = None, include_empty: bool = False) -> List[Word]:
    """L1/L2 는 전수 열거, L3 는 큐레이션 집합 (max_len 이 있으면 그 길이 이하만)"""
    if language is Language.L3:
        words = curated_l3_words()
        if max_len is not None:
            words = [w for w in words if w.length <= max_len]
        return words
    if max_len is None:
        raise ValueError(f"{language.value} 차분 테스트에는 max_len 이 필요합니다")
    return enumerate_words(language.alphabet, max_len, include_empty=include_empty)


def evaluate_word(
    job: Tuple[ChemistryModel, AliquotRecipe, Mixture, float, Word]
) -> DifferentialRow:
    """단어 하나를 실행하고 오라클과 비교한다 (프로세스 풀에서 호출 가능)."""
    model, recipe, initial, interval_s, word = job
    oracle = recognize(model.language, word)
    try:
        _, chemical = run_word(model, recipe, FeedSchedule(word, interval_s), initial)
    except (SimulationError, ConsistencyError, NumericalError) as e:
        logger.warning(f"'{word}' 시뮬레이션 실패: {e}")
        return DifferentialRow(str(word), oracle, None, f"{type(e).__name__}: {e}")
    return DifferentialRow(str(word), oracle, chemical)


def differential_test(
    language: Language,
    model: ChemistryModel,
    recipe: AliquotRecipe,
    initial: Mixture,
    max_len: Optional[int] = None,
    words: Optional[Sequence[Word]] = None,
    interval_s: float = settings.TAU_S,
    jobs: int = 1,
) -> DifferentialReport:
    """화학 판정과 오라클 판정을 모든 단어에 대해 비교한다.

    Args:
        words: 주어지면 열거 대신 이 단어들을 사용
        jobs: 2 이상이면 ProcessPoolExecutor 사용
    """
    if model.language is not language:
        raise ValueError(f"모델 언어({model.language.value}) 와 {language.value} 가 다릅니다")
    word_list = list(words) if words is not None else suite_words(language, max_len)
    jobs_iter: Iterable = ((model, recipe, initial, interval_s, w) for w in word_list)

    logger.info(f"[{language.value}] 차분 테스트 시작: {len(word_list)}개 단어, jobs={jobs}")
    start = time.perf_counter()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(evaluate_word, jobs_iter, chunksize=max(1, len(word_list) // (4 * jobs))))
    else:
        rows = [evaluate_word(job) for job in jobs_iter]
    report = DifferentialReport(language, max_len, rows, time.perf_counter() - start)

    logger.info(
        f"[{language.value}] 차분 테스트 완료: {len(rows)}개 중 불일치 {report.mismatch_count}개 "
        f"({report.runtime_s:.2f}s)"
    )
    for row in report.mismatches[:10]:
        chem = row.chemical.label() if row.chemical else row.diagnostic
        logger.info(f"  불일치 '{row.word}': oracle={row.oracle.label()} chemical={chem}")
    return report
