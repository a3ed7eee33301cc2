from __future__ import annotations

from dataclasses import dataclass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class OptimizationFlags:
    """Engine toggles; each defaults to the optimized behavior."""

    sorted_neighbors: bool = True
    single_round: bool = True
    selective_send: bool = True
    extended_notify: bool = True
    hybrid_tail: bool = True


def check_parallel_config(threads: int, batch: int) -> None:
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    if batch < 1:
        raise ConfigError(f"batch must be >= 1, got {batch}")
