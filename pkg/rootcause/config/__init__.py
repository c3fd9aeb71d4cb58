"""
Root-Cause Classifier Configuration Package
"""

from .settings import *

__all__ = [
    "ConfigError",
    "RunConfig",
    "derive_seed",
    "get_env",
    "validate_config",
    "DATA_DIR",
    "LOG_LEVEL",
    "LOG_FORMAT",
]
