"""
화학 오토마타 시뮬레이터
메인 패키지 초기화 파일
"""

__version__ = "0.1.0"
__author__ = "Chemical Automata Team"
__license__ = "MIT"
