"""Core module for DeliberPy."""

from deliberpy.core.config import Config
from deliberpy.core.logger import Logger

__all__ = ["Config", "Logger"]
