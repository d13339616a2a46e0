"""
StableTheta Configuration Management
Handles application constants, defaults, and configuration loading/saving
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from ..exceptions import ConfigurationError

logger = logging.getLogger(__name__)

# Application Constants
APP_NAME = "StableTheta"
APP_VERSION = "1.0.0"
CONFIG_FILE = "stabletheta_config.json"
CACHE_FORMAT_VERSION = 1

FORM_LABELS = ("E8", "E8E8", "D16PLUS")
COMMANDS = ("theta", "igusa", "stable-check", "operators", "grenier")

# Default Configuration
DEFAULT_CONFIG = {
    "budget": 10**9,
    "max_genus": 4,
    "full_genus4": False,
    "canonicalize_indices": True,
    "workers": 1,
    "shell_cache_max_vectors": 5_000_000,
    "t_schedule": [1e2, 1e3, 1e4],
    "v_schedule": [10.0, 100.0, 1e4],
    "operator_tolerance": 1e-6,
    "cocycle_tolerance": 1e-9,
    "eval_tail_tolerance": 1e-9,
    "conditioning_limit": 1e12,
    "cache_enabled": True,
    "cache_dir": ".stabletheta_cache",
    "log_level": "WARNING",
    "random_seed": 20240101,
}


class ConfigManager:
    """Manages application configuration"""

    def __init__(self, config_file: str = CONFIG_FILE):
        self.config_file = config_file
        self.config = self.load_config()

    def load_config(self) -> Dict[str, Any]:
        """Load configuration from file or create default"""
        if os.path.exists(self.config_file):
            try:
                with open(self.config_file, 'r') as f:
                    config = json.load(f)
                # Merge with defaults to ensure all keys exist
                merged_config = DEFAULT_CONFIG.copy()
                merged_config.update(config)
                return merged_config
            except (OSError, ValueError) as e:
                logger.warning("Error loading config %s: %s; using defaults", self.config_file, e)
                return DEFAULT_CONFIG.copy()
        return DEFAULT_CONFIG.copy()

    def save_config(self) -> bool:
        """Save configuration to file"""
        try:
            with open(self.config_file, 'w') as f:
                json.dump(self.config, f, indent=4)
            return True
        except OSError as e:
            logger.error("Error saving config %s: %s", self.config_file, e)
            return False

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value"""
        return self.config.get(key, default)

    def set(self, key: str, value: Any) -> None:
        """Set configuration value"""
        self.config[key] = value

    def update(self, updates: Dict[str, Any]) -> None:
        """Update multiple configuration values"""
        self.config.update(updates)

    def reset_to_defaults(self) -> None:
        """Reset configuration to defaults"""
        self.config = DEFAULT_CONFIG.copy()

    def get_budget_settings(self) -> Dict[str, Any]:
        """Get enumeration budget settings"""
        return {
            "budget": self.get("budget", DEFAULT_CONFIG["budget"]),
            "max_genus": self.get("max_genus", DEFAULT_CONFIG["max_genus"]),
            "full_genus4": self.get("full_genus4", False),
            "canonicalize_indices": self.get("canonicalize_indices", True),
            "workers": self.get("workers", 1),
            "shell_cache_max_vectors": self.get("shell_cache_max_vectors", DEFAULT_CONFIG["shell_cache_max_vectors"]),
        }

    def get_schedule_settings(self) -> Dict[str, Any]:
        """Get limit schedules"""
        return {
            "t_schedule": list(self.get("t_schedule", DEFAULT_CONFIG["t_schedule"])),
            "v_schedule": list(self.get("v_schedule", DEFAULT_CONFIG["v_schedule"])),
        }

    def get_tolerance_settings(self) -> Dict[str, float]:
        """Get numeric tolerances"""
        return {
            key: float(self.get(key, DEFAULT_CONFIG[key]))
            for key in ("operator_tolerance", "cocycle_tolerance", "eval_tail_tolerance", "conditioning_limit")
        }


def _check_schedule(name: str, schedule: Tuple[float, ...]) -> None:
    if not schedule:
        raise ConfigurationError(f"{name} is empty")
    if any(value <= 0 for value in schedule):
        raise ConfigurationError(f"{name} must be positive: {list(schedule)}")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ConfigurationError(f"{name} must be strictly increasing: {list(schedule)}")


@dataclass(frozen=True)
class RunConfig:
    """Validated settings for a single CLI run; flags override the file, the file overrides defaults"""

    command: str
    form_label: str = "E8"
    genus: int = 1
    trace_bound: int = 6
    t_schedule: Tuple[float, ...] = (1e2, 1e3, 1e4)
    v_schedule: Tuple[float, ...] = (10.0, 100.0, 1e4)
    budget: int = 10**9
    output_path: Optional[str] = None
    cache_dir: Optional[str] = None
    workers: int = 1
    full_genus4: bool = False
    canonicalize: bool = True
    tolerances: Dict[str, float] = field(default_factory=dict)
    seed: int = DEFAULT_CONFIG["random_seed"]

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigurationError(f"unknown command {self.command!r}")
        if self.form_label not in FORM_LABELS:
            raise ConfigurationError(f"unknown form {self.form_label!r}; expected one of {', '.join(FORM_LABELS)}")
        if self.genus < 0:
            raise ConfigurationError(f"genus must be nonnegative, got {self.genus}")
        if self.genus > 4 and not self.full_genus4:
            raise ConfigurationError(f"genus {self.genus} exceeds the default budget ceiling 4")
        if self.trace_bound < 0 or self.trace_bound % 2:
            raise ConfigurationError(f"trace bound must be even and nonnegative, got {self.trace_bound}")
        if self.budget <= 0:
            raise ConfigurationError(f"budget must be positive, got {self.budget}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be at least 1, got {self.workers}")
        _check_schedule("t-schedule", self.t_schedule)
        _check_schedule("v-schedule", self.v_schedule)

    @classmethod
    def from_sources(cls, config_manager: ConfigManager, command: str, **overrides: Any) -> "RunConfig":
        """
        Build a RunConfig from the configuration file and CLI overrides

        Args:
            config_manager: Loaded configuration
            command: Subcommand name
            **overrides: Flag values; None means "not given"

        Returns:
            Validated RunConfig
        """
        budget = config_manager.get_budget_settings()
        schedules = config_manager.get_schedule_settings()
        values: Dict[str, Any] = {
            "budget": int(budget["budget"]),
            "workers": int(budget["workers"]),
            "full_genus4": bool(budget["full_genus4"]),
            "canonicalize": bool(budget["canonicalize_indices"]),
            "t_schedule": tuple(float(v) for v in schedules["t_schedule"]),
            "v_schedule": tuple(float(v) for v in schedules["v_schedule"]),
            "cache_dir": config_manager.get("cache_dir") if config_manager.get("cache_enabled", True) else None,
            "tolerances": config_manager.get_tolerance_settings(),
            "seed": int(config_manager.get("random_seed", DEFAULT_CONFIG["random_seed"])),
        }
        for key, value in overrides.items():
            if value is None:
                continue
            if key in ("t_schedule", "v_schedule"):
                value = tuple(float(v) for v in value)
            values[key] = value
        return cls(command=command, **values)
