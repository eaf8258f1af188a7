"""
数值服务模块
"""
