"""
locus 산점도 SVG 출력기 (matplotlib, Agg 백엔드)

- x: 진동수 (Hz), y: 진폭 차이 (V)
- 판정 라벨별 마커, 단어 주석
- 수용 밴드가 있으면 밴드 안 단어들을 굵은 검은 선(일정 면적 locus)으로 잇는다
"""
from __future__ import annotations

import logging
import os
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from config import settings  # noqa: E402

logger = logging.getLogger(__name__)

_MARKERS: Dict[str, Tuple[str, str]] = {
    "Accept": ("o", "tab:green"),
    "Reject(ExcessA)": ("^", "tab:red"),
    "Reject(ExcessB)": ("s", "tab:orange"),
    "Reject(ExcessC)": ("v", "tab:blue"),
    "Reject(BadOrder)": ("x", "tab:gray"),
}


def write_locus_svg(
    path: str,
    points: Sequence[Mapping[str, Any]],
    band: Optional[Tuple[float, float]] = None,
) -> None:
    """points: {word, frequency_Hz, amplitude_diff_V, area_Vs, verdict} 목록"""
    plt.rcParams["svg.hashsalt"] = settings.SVG_HASH_SALT
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    try:
        for label in sorted({p["verdict"] for p in points}):
            marker, color = _MARKERS.get(label, ("D", "tab:purple"))
            sel = [p for p in points if p["verdict"] == label]
            ax.scatter(
                [p["frequency_Hz"] for p in sel],
                [p["amplitude_diff_V"] for p in sel],
                marker=marker,
                color=color,
                label=label,
            )
        for p in points:
            ax.annotate(p["word"], (p["frequency_Hz"], p["amplitude_diff_V"]), fontsize=7)

        if band is None or not band[1] > band[0]:
            logger.warning("수용 밴드가 비어 있어 locus 오버레이를 생략합니다")
        else:
            on_locus = sorted(
                (p for p in points if band[0] <= p["area_Vs"] <= band[1]),
                key=lambda p: (p["frequency_Hz"], p["word"]),
            )
            if len(on_locus) >= 2:
                ax.plot(
                    [p["frequency_Hz"] for p in on_locus],
                    [p["amplitude_diff_V"] for p in on_locus],
                    color="black",
                    linewidth=2.5,
                    label=f"A* ± δ = [{band[0]:.2f}, {band[1]:.2f}] V·s",
                )

        ax.set_xlabel("frequency (Hz)")
        ax.set_ylabel("amplitude difference (V)")
        ax.legend(fontsize=7, loc="best")
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
        logger.debug(f"SVG 저장: {path}")
    finally:
        plt.close(fig)
