"""
gfcalc - Colombeau 广义函数数值演算库
"""

__version__ = "1.0.0"
