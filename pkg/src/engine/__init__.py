"""
반응기 엔진 패키지
반자유 반응기, 화학 모델(FA/PDA/TM), 적분기, 산화환원 관측
"""

__all__ = []
