"""
형식 언어 패키지
L1/L2/L3 오라클과 단어 열거
"""

__all__ = []
