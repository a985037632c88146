"""Mean-field-game model of circadian oscillators and jet-lag recovery."""

from ._core import (
    ConfigError,
    ErgodicSolution,
    SolverError,
    circular_w2,
    mathieu_a0,
    oracle_check,
    order_parameter,
    recover_ergodic,
    recover_mfg,
    solve_ergodic,
    special_case,
)

__all__ = [
    "ConfigError",
    "ErgodicSolution",
    "SolverError",
    "circular_w2",
    "mathieu_a0",
    "oracle_check",
    "order_parameter",
    "recover_ergodic",
    "recover_mfg",
    "solve_ergodic",
    "special_case",
]
