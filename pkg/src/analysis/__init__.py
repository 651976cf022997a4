"""
분석 패키지
오라클 차분 테스트, 레시피 튜닝, locus 지도
"""

__all__ = []
