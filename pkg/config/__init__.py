"""
Configuration management for the gamma belief network engine.
"""
import os
from pathlib import Path
from typing import Any, Dict

import yaml
from dotenv import load_dotenv

from errors import ConfigError

# Load environment variables
load_dotenv()


class Config:
    """Main configuration class."""

    # Paths
    BASE_DIR = Path(__file__).parent.parent
    CONFIG_PATH = BASE_DIR / "config" / "config.yaml"
    OUTPUT_DIR = Path(os.getenv("PGBN_OUTPUT_DIR", str(BASE_DIR / "runs")))

    # Reproducibility and parallelism
    SEED = int(os.getenv("PGBN_SEED", 20150101))
    WORKERS = int(os.getenv("PGBN_WORKERS", 1))

    # Application Settings
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

    @classmethod
    def load_yaml(cls) -> Dict[str, Any]:
        """Load configuration from YAML file."""
        if cls.CONFIG_PATH.exists():
            with open(cls.CONFIG_PATH, "r", encoding="utf-8") as f:
                return yaml.safe_load(f) or {}
        return {}

    @classmethod
    def validate(cls) -> None:
        """Validate environment-derived settings."""
        if cls.WORKERS < 1:
            raise ConfigError(f"PGBN_WORKERS must be >= 1, got {cls.WORKERS}")
        if cls.SEED < 0:
            raise ConfigError(f"PGBN_SEED must be >= 0, got {cls.SEED}")

    @classmethod
    def section(cls, name: str) -> Dict[str, Any]:
        """Return one top-level section of config.yaml (empty if absent)."""
        return dict(yaml_config.get(name) or {})


# Global config instance
config = Config()
yaml_config = config.load_yaml()
