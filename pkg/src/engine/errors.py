"""
엔진 공통 예외 정의

내장 ValueError / RuntimeError 를 그대로 상속하여 호출 측에서
기존 방식(except ValueError 등)으로도 잡을 수 있게 한다.

한국어 주석 포함.
"""
from __future__ import annotations

from typing import Any, Dict, Optional


class WordError(ValueError):
    """알파벳 밖의 기호가 포함된 입력"""


class ConfigError(ValueError):
    """설정/레시피/보정값 오류"""


class UndefinedYieldError(ValueError):
    """엔탈피 수율 분모가 0 (입력 없음)"""


class NumericalError(RuntimeError):
    """근 찾기(bracketing) 실패 등 수치 오류"""


class ConsistencyError(RuntimeError):
    """서로 같아야 하는 두 신호/계산이 어긋남"""


class SimulationError(RuntimeError):
    """적분 실패. 실패 직전까지의 궤적(partial)을 함께 보관한다."""

    def __init__(self, message: str, partial: Optional[Any] = None):
        super().__init__(message)
        self.partial = partial


class TuningError(RuntimeError):
    """레시피 튜닝 실패 (진동 영역의 feasible 점을 찾지 못함)"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
