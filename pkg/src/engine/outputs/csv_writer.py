"""
CSV 출력기

- 궤적: t, 화학종 농도..., 관측값...
- 차분 테스트 리포트: word, oracle, chemical, match
- locus 지도: word, frequency_Hz, amplitude_diff_V, area_Vs, verdict, side

실수는 repr 정밀도로 기록하여 같은 입력이면 같은 바이트가 나오게 한다.
"""
from __future__ import annotations

import csv
import logging
import os
from typing import Any, Iterable, Sequence

from src.engine.reactor import Trajectory

logger = logging.getLogger(__name__)


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def write_rows(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    """헤더와 행을 기록하고 행 수를 반환한다."""
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
            count += 1
    logger.debug(f"CSV 저장: {path} ({count}행)")
    return count


def write_trajectory(path: str, traj: Trajectory) -> int:
    species = traj.species_names()
    observables = traj.observable_names()
    rows = (
        [t] + [mix.conc(s) for s in species] + [obs.get(name) for name in observables]
        for t, mix, obs in zip(traj.times, traj.mixtures, traj.observables)
    )
    return write_rows(path, ["t"] + species + observables, rows)
