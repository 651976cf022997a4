"""
진동수-진폭 locus 지도

- 실행 결과(run manifest) 들을 (frequency, amplitude_diff) 산점도로 정리
- 수용 밴드 기준 위치 라벨: above / below / on
- CSV 와 SVG 로 출력
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from src.engine.chem_tm import TMCalibration
from src.engine.outputs.csv_writer import write_rows
from src.engine.outputs.svg_writer import write_locus_svg

logger = logging.getLogger(__name__)

LOCUS_HEADER = ("word", "frequency_Hz", "amplitude_diff_V", "area_Vs", "verdict", "side")


@dataclass(frozen=True)
class LocusPoint:
    word: str
    frequency_Hz: float
    amplitude_diff_V: float
    area_Vs: float
    verdict: str
    side: str = ""

    def row(self) -> Tuple[Any, ...]:
        return tuple(getattr(self, name) for name in LOCUS_HEADER)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def point_from_manifest(manifest: Mapping[str, Any]) -> Dict[str, Any]:
    """run manifest 에서 locus 입력 레코드를 뽑는다."""
    metrics = manifest.get("metrics", {})
    verdict = manifest["verdict"]
    label = verdict["outcome"] if not verdict.get("reject_kind") else f"{verdict['outcome']}({verdict['reject_kind']})"
    return {
        "word": manifest["word"],
        "frequency_Hz": float(metrics["frequency_Hz"]),
        "amplitude_diff_V": float(metrics["amplitude_diff_V"]),
        "area_Vs": float(metrics["area_Vs"]),
        "verdict": label,
    }


def locus_map(
    runs: Sequence[Mapping[str, Any]], calibration: Optional[TMCalibration] = None
) -> List[LocusPoint]:
    """runs: {word, frequency_Hz, amplitude_diff_V, area_Vs, verdict} 레코드 (입력 순서 유지)"""
    if len(runs) < 2:
        raise ValueError(f"locus 지도에는 실행 결과가 2개 이상 필요합니다: {len(runs)}")
    points = []
    for run in runs:
        area = float(run["area_Vs"])
        side = calibration.side(area) if calibration is not None else ""
        points.append(
            LocusPoint(
                str(run["word"]),
                float(run["frequency_Hz"]),
                float(run["amplitude_diff_V"]),
                area,
                str(run["verdict"]),
                side,
            )
        )
    return points


def write_locus(
    points: Sequence[LocusPoint],
    csv_path: str,
    svg_path: Optional[str] = None,
    calibration: Optional[TMCalibration] = None,
) -> int:
    """CSV (행 수 = 점 수) 와 선택적으로 SVG 를 기록한다."""
    n = write_rows(csv_path, LOCUS_HEADER, (p.row() for p in points))
    if svg_path:
        band = calibration.band if calibration is not None else None
        write_locus_svg(svg_path, [p.to_dict() for p in points], band)
    logger.info(f"locus 지도 {n}개 점 저장: {csv_path}")
    return n
