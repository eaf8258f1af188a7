"""
迷你语言解析与报告写出
"""
