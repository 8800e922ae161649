"""
Configuration management for the TDM toolchain.
"""

import logging
import os
import sys
from dataclasses import dataclass

import structlog

from .engine import DEFAULT_STATE_CAP

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


@dataclass
class ToolConfig:
    """Configuration settings for the command line tool."""

    # Enumeration safety cap (assignments in the Cartesian product)
    state_cap: int = DEFAULT_STATE_CAP
    log_level: str = "WARNING"
    debug: bool = False

    def __post_init__(self) -> None:
        if self.state_cap < 1:
            raise ValueError(f"state cap must be a positive integer, got {self.state_cap}")
        self.log_level = self.log_level.upper()
        if self.log_level not in LOG_LEVELS:
            raise ValueError(f"unknown log level: {self.log_level}")

    @classmethod
    def from_env(cls) -> "ToolConfig":
        """Create configuration from environment variables."""
        raw_cap = os.getenv("TDM_STATE_CAP", str(DEFAULT_STATE_CAP))
        try:
            state_cap = int(raw_cap)
        except ValueError:
            raise ValueError(f"TDM_STATE_CAP must be an integer, got {raw_cap!r}") from None
        return cls(
            state_cap=state_cap,
            log_level=os.getenv("TDM_LOG_LEVEL", "WARNING"),
            debug=os.getenv("TDM_DEBUG", "false").lower() == "true",
        )


class _Stderr:
    """Writes to whatever ``sys.stderr`` is at the time of the call."""

    def write(self, text: str) -> int:
        return sys.stderr.write(text)

    def flush(self) -> None:
        sys.stderr.flush()


def setup_logging(log_level: str = "WARNING") -> None:
    """Setup structlog to write level-filtered events to standard error."""
    level = getattr(logging, log_level.upper())
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.dev.ConsoleRenderer(colors=False),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        logger_factory=structlog.PrintLoggerFactory(file=_Stderr()),  # type: ignore[arg-type]
        cache_logger_on_first_use=False,
    )
