"""
Settings loader for the layer-wise training experiments.

This module provides centralized runtime settings (output file names and
logging) loaded from config/settings.yaml.
"""

from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from loguru import logger
from pydantic import BaseModel, Field


class OutputConfig(BaseModel):
    """Names of the files an experiment run writes into its output directory."""
    curves_file: str = Field(default="curves.csv", description="Per-epoch curve rows")
    summary_file: str = Field(default="summary.txt", description="Plain-text summary report")
    models_dir: str = Field(default="models", description="Subdirectory for serialized final models")
    data_dir: str = Field(default="data", description="Subdirectory for the train/validation CSVs")


class LoggingConfig(BaseModel):
    """Logging configuration settings."""
    level: str = Field(default="INFO", description="File sink logging level")
    console_level: str = Field(default="INFO", description="Console sink logging level")
    file: str = Field(default="logs/experiment.log", description="Log file path")
    format: str = Field(
        default="{time:YYYY-MM-DD HH:mm:ss} | {level} | {name}:{function}:{line} | {message}",
        description="Log message format",
    )


class ConfigLoader:
    """Loads and manages runtime settings from YAML files."""

    def __init__(self, config_file: Optional[str] = None):
        """
        Initialize settings loader.

        Args:
            config_file: Path to settings file. Defaults to config/settings.yaml
        """
        self.config_file = config_file or self._get_default_config_path()
        self._config_data: Dict[str, Any] = {}
        self._load_config()

    def _get_default_config_path(self) -> str:
        """Get default settings file path."""
        project_root = Path(__file__).parent.parent
        return str(project_root / "config" / "settings.yaml")

    def _load_config(self) -> None:
        """Load settings from YAML file."""
        try:
            with open(self.config_file, "r", encoding="utf-8") as file:
                self._config_data = yaml.safe_load(file) or {}
            logger.debug(f"Settings loaded from: {self.config_file}")
        except FileNotFoundError:
            logger.error(f"Settings file not found: {self.config_file}")
            raise
        except yaml.YAMLError as e:
            logger.error(f"Error parsing YAML settings: {e}")
            raise

    @property
    def output(self) -> OutputConfig:
        """Get output file settings."""
        return OutputConfig(**self._config_data.get("output", {}))

    @property
    def logging(self) -> LoggingConfig:
        """Get logging settings."""
        return LoggingConfig(**self._config_data.get("logging", {}))


# Global settings instance
settings = ConfigLoader()
