"""
命令行命令处理
"""
