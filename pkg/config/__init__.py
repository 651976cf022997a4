"""실행 상수"""
