"""
Base Command Handler for weakbell
Abstract base class that all command handlers inherit from
"""

import logging
import time
from abc import ABC, abstractmethod

from ..models import RunConfig
from ..report import Report

logger = logging.getLogger(__name__)


class BaseCommandHandler(ABC):
    """Base class for all command handlers"""

    def __init__(self, command_name: str):
        self.command_name = command_name

    @abstractmethod
    def execute(self, config: RunConfig) -> Report:
        """Run the command described by a validated configuration"""

    def execute_with_timing(self, config: RunConfig) -> Report:
        """Execute and log the wall time (kept out of the report so output stays reproducible)"""
        start_time = time.perf_counter()
        try:
            return self.execute(config)
        finally:
            logger.info("%s finished in %.3f s", self.command_name, time.perf_counter() - start_time)
