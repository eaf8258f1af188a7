"""
配置管理模块
将所有数值常量与容差集中到此文件中，支持环境变量覆盖
"""

import os
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional


def _env_float(name: str, default: float) -> float:
    return float(os.getenv(name, str(default)))


def _env_int(name: str, default: int) -> int:
    return int(os.getenv(name, str(default)))


@dataclass
class GridConfig:
    """ε网格配置"""

    k_min: int = 1
    k_max: int = 40
    window: int = 12
    # 配对与全代数网的信号须高于求积噪声，使用较短网格
    assoc_k_max: int = 24
    full_k_max: int = 8


@dataclass
class ToleranceConfig:
    """分类器与数值容差配置"""

    r2_min: float = 0.99
    zero_floor: float = 1e-13
    m_max: int = 8
    n_cap: int = 50
    m_cap: int = 50
    quad_tol: float = 1e-10
    quad_max_depth: int = 40
    moment_tol: float = 1e-11
    sup_points: int = 2049


@dataclass
class MollifierConfig:
    """磨光子调度配置"""

    q_max: int = 6
    # 阈值 ε_j = 2^(-threshold_step * j)
    threshold_step: int = 4
    max_q: int = 12
    gram_residual: float = 1e-8


@dataclass
class PlotConfig:
    """参数族支撑判定配置"""

    scan_points: int = 4097
    support_floor: float = 1e-13
    box: float = 1e6
    u_samples: int = 17
    shrink_steps: int = 6


@dataclass
class RuntimeConfig:
    """运行时配置"""

    threads: int = 1
    seed: int = 42
    panel_size: int = 5


@dataclass
class LogConfig:
    """日志配置"""

    log_dir: Optional[str] = None
    log_file: str = "gfcalc.log"
    max_bytes: int = 10 * 1024 * 1024  # 10MB
    backup_count: int = 5
    log_level: str = "WARNING"
    log_format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    date_format: str = "%Y-%m-%d %H:%M:%S"


@dataclass
class AppConfig:
    """应用总配置"""

    grid: GridConfig
    tolerance: ToleranceConfig
    mollifier: MollifierConfig
    plot: PlotConfig
    runtime: RuntimeConfig
    log: LogConfig
    demos: List[str] = field(
        default_factory=lambda: [
            "hsquared",
            "xdelta",
            "deltasquared",
            "heaviside-at-0",
            "delta-at-0",
        ]
    )

    @classmethod
    def from_env(cls) -> "AppConfig":
        """从环境变量加载配置"""
        grid = GridConfig(
            k_min=_env_int("GFCALC_K_MIN", 1),
            k_max=_env_int("GFCALC_K_MAX", 40),
            window=_env_int("GFCALC_WINDOW", 12),
            assoc_k_max=_env_int("GFCALC_ASSOC_K_MAX", 24),
            full_k_max=_env_int("GFCALC_FULL_K_MAX", 8),
        )

        tolerance = ToleranceConfig(
            r2_min=_env_float("GFCALC_R2_MIN", 0.99),
            zero_floor=_env_float("GFCALC_ZERO_FLOOR", 1e-13),
            m_max=_env_int("GFCALC_M_MAX", 8),
            n_cap=_env_int("GFCALC_N_CAP", 50),
            m_cap=_env_int("GFCALC_M_CAP", 50),
            quad_tol=_env_float("GFCALC_QUAD_TOL", 1e-10),
            quad_max_depth=_env_int("GFCALC_QUAD_MAX_DEPTH", 40),
            moment_tol=_env_float("GFCALC_MOMENT_TOL", 1e-11),
            sup_points=_env_int("GFCALC_SUP_POINTS", 2049),
        )

        mollifier = MollifierConfig(
            q_max=_env_int("GFCALC_Q_MAX", 6),
            threshold_step=_env_int("GFCALC_THRESHOLD_STEP", 4),
            max_q=_env_int("GFCALC_MAX_Q", 12),
            gram_residual=_env_float("GFCALC_GRAM_RESIDUAL", 1e-8),
        )

        plot = PlotConfig(
            scan_points=_env_int("GFCALC_SCAN_POINTS", 4097),
            support_floor=_env_float("GFCALC_SUPPORT_FLOOR", 1e-13),
            box=_env_float("GFCALC_SCAN_BOX", 1e6),
            u_samples=_env_int("GFCALC_U_SAMPLES", 17),
            shrink_steps=_env_int("GFCALC_SHRINK_STEPS", 6),
        )

        runtime = RuntimeConfig(
            threads=max(1, _env_int("GFCALC_THREADS", 1)),
            seed=_env_int("GFCALC_SEED", 42),
            panel_size=_env_int("GFCALC_PANEL_SIZE", 5),
        )

        log = LogConfig(
            log_dir=os.getenv("GFCALC_LOG_DIR") or None,
            log_file=os.getenv("GFCALC_LOG_FILE", "gfcalc.log"),
            max_bytes=_env_int("GFCALC_LOG_MAX_BYTES", 10 * 1024 * 1024),
            backup_count=_env_int("GFCALC_LOG_BACKUP_COUNT", 5),
            log_level=os.getenv("GFCALC_LOG_LEVEL", "WARNING"),
            log_format=os.getenv(
                "GFCALC_LOG_FORMAT",
                "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            ),
            date_format=os.getenv("GFCALC_LOG_DATE_FORMAT", "%Y-%m-%d %H:%M:%S"),
        )

        return cls(
            grid=grid,
            tolerance=tolerance,
            mollifier=mollifier,
            plot=plot,
            runtime=runtime,
            log=log,
        )


# 全局配置实例
config = AppConfig.from_env()


@contextmanager
def overridden(**sections: Dict[str, Any]) -> Iterator[AppConfig]:
    """临时修改全局配置字段，退出时恢复，例如 overridden(grid={"k_max": 20})"""
    saved = []
    try:
        for name, changes in sections.items():
            section = getattr(config, name)
            for key, value in changes.items():
                if not hasattr(section, key):
                    raise AttributeError(f"配置节 {name} 没有字段 {key}")
                saved.append((section, key, getattr(section, key)))
                setattr(section, key, value)
        yield config
    finally:
        for section, key, value in reversed(saved):
            setattr(section, key, value)
