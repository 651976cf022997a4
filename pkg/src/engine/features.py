"""
진동 특징 추출기

- 피크 검출 (scipy.signal.find_peaks, prominence 기준)
- 진동수: (피크 수 - 1) / (첫 피크와 마지막 피크 사이 시간)
- 진폭 차이: 마지막 구간 (피크 평균 - 골 평균) 에서 '#' 이전 구간의 같은 값을 뺀 값

한국어 주석 포함.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Dict, Tuple

import numpy as np
from scipy import signal

from config import settings
from src.engine.reactor import FeedSchedule, Trajectory


@dataclass(frozen=True)
class OscillationDescriptors:
    frequency_hz: float
    amplitude_diff_v: float
    peak_count: int
    final_amplitude_v: float
    pre_amplitude_v: float
    degenerate: bool

    def __post_init__(self) -> None:
        if self.frequency_hz < 0.0:
            raise ValueError(f"진동수는 0 이상이어야 합니다: {self.frequency_hz}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def window(times: np.ndarray, values: np.ndarray, t0: float, t1: float) -> Tuple[np.ndarray, np.ndarray]:
    mask = (times >= t0 - 1e-9) & (times <= t1 + 1e-9)
    return times[mask], values[mask]


def detect_extrema(values: np.ndarray, v_max: float) -> Tuple[np.ndarray, np.ndarray]:
    """(피크 인덱스, 골 인덱스). 평균보다 위의 피크와 아래의 골만 남긴다."""
    if values.size < 3:
        return np.array([], dtype=int), np.array([], dtype=int)
    prominence = settings.PEAK_PROMINENCE_FRAC * (v_max - float(values.min()))
    if not prominence > 0.0:
        return np.array([], dtype=int), np.array([], dtype=int)
    mean = float(values.mean())
    peaks, _ = signal.find_peaks(values, prominence=prominence)
    troughs, _ = signal.find_peaks(-values, prominence=prominence)
    return peaks[values[peaks] > mean], troughs[values[troughs] < mean]


def swing(values: np.ndarray, v_max: float) -> float:
    """피크 평균 - 골 평균 (둘 중 하나라도 없으면 0)"""
    peaks, troughs = detect_extrema(values, v_max)
    if peaks.size == 0 or troughs.size == 0:
        return 0.0
    return float(values[peaks].mean() - values[troughs].mean())


def frequency(times: np.ndarray, values: np.ndarray, v_max: float) -> Tuple[float, int]:
    """(진동수 Hz, 피크 수). 피크가 2개 미만이면 0"""
    peaks, _ = detect_extrema(values, v_max)
    if peaks.size < 2:
        return 0.0, int(peaks.size)
    span = times[peaks[-1]] - times[peaks[0]]
    if not span > 0.0:
        return 0.0, int(peaks.size)
    return (peaks.size - 1) / span, int(peaks.size)


def signal_descriptors(
    times: np.ndarray,
    values: np.ndarray,
    v_max: float,
    final_window: Tuple[float, float],
    pre_window: Tuple[float, float],
) -> OscillationDescriptors:
    t_fin, v_fin = window(times, values, *final_window)
    freq, n_peaks = frequency(t_fin, v_fin, v_max)
    final_amp = swing(v_fin, v_max)
    if pre_window[0] >= 0.0:
        _, v_pre = window(times, values, *pre_window)
        pre_amp = swing(v_pre, v_max)
    else:
        pre_amp = 0.0
    return OscillationDescriptors(
        frequency_hz=freq,
        amplitude_diff_v=final_amp - pre_amp,
        peak_count=n_peaks,
        final_amplitude_v=final_amp,
        pre_amplitude_v=pre_amp,
        degenerate=n_peaks < 2,
    )


def estimate_descriptors(traj: Trajectory, schedule: FeedSchedule, v_max: float) -> OscillationDescriptors:
    """'#' 이후 마지막 구간의 진동수와 진폭 차이.

    마지막 구간: [t_# + 30, t_# + tau], 비교 구간: [t_# - tau + 30, t_#]
    """
    t_mark = schedule.t_end_marker_s
    tau = schedule.interval_s
    discard = settings.TRANSIENT_DISCARD_S
    return signal_descriptors(
        traj.time_array(),
        traj.column("V_volt"),
        v_max,
        (t_mark + discard, t_mark + tau),
        (t_mark - tau + discard, t_mark),
    )
