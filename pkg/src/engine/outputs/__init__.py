"""
출력기 패키지
궤적/보고서 CSV, 정렬된 JSON, locus SVG
"""

__all__ = []
