"""
CLI 패키지
click 기반 명령행 인터페이스와 TOML 설정 관리
"""

__all__ = []
