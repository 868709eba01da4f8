"""
Command handlers for the weakbell CLI
"""

from typing import Dict

from .base_handler import BaseCommandHandler
from .chsh_handler import ChshHandler
from .curve_handler import CurveHandler
from .lg_handler import LgHandler
from .lhv_handler import LhvHandler
from .theorem1_handler import Theorem1Handler


def build_handlers() -> Dict[str, BaseCommandHandler]:
    """Command name -> handler registry"""
    handlers: Dict[str, BaseCommandHandler] = {}
    for handler in (ChshHandler(), CurveHandler(), LhvHandler(), LgHandler(), Theorem1Handler()):
        handlers[handler.command_name] = handler
    return handlers


__all__ = [
    "BaseCommandHandler",
    "ChshHandler",
    "CurveHandler",
    "LgHandler",
    "LhvHandler",
    "Theorem1Handler",
    "build_handlers",
]
