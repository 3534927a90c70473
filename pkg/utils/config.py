"""
Configuration loader for the 5G Puppeteer simulator

Loads config.yaml from the project root (or from the path named by the
PUPPETEER_CONFIG environment variable). All default values live in config.yaml.
This module provides a simple interface to access those values.

Single source of truth: config.yaml
"""

import os
import sys
from pathlib import Path

import yaml


CONFIG_ENV_VAR = "PUPPETEER_CONFIG"
DEFAULT_CONFIG_PATH = Path(__file__).parent.parent / "config.yaml"


class Config:
    """
    Configuration manager that loads config.yaml.

    If config.yaml is missing or invalid, holds an empty dict and prints a
    warning on stderr; callers always pass an explicit default to get().
    """

    def __init__(self, config_path=None):
        if config_path is None:
            config_path = os.getenv(CONFIG_ENV_VAR) or DEFAULT_CONFIG_PATH
        self.config_path = Path(config_path)
        self.config = self._load_config()

    def _load_config(self):
        """Load configuration from YAML file"""
        if not self.config_path.exists():
            print(f"Warning: Config file '{self.config_path}' not found. Using empty config.", file=sys.stderr)
            return {}

        try:
            with open(self.config_path, 'r') as f:
                config = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            print(f"Error loading config file: {e}", file=sys.stderr)
            print("Using empty config. Please check config.yaml syntax.", file=sys.stderr)
            return {}

        if config is None:
            print(f"Warning: Config file '{self.config_path}' is empty.", file=sys.stderr)
            return {}
        if not isinstance(config, dict):
            print(f"Warning: Config file '{self.config_path}' is not a mapping. Ignoring it.", file=sys.stderr)
            return {}
        return config

    def get(self, *keys, default=None):
        """Get configuration value by nested keys"""
        value = self.config
        for key in keys:
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default
        return value


# Global config instance
_config = None


def get_config():
    """Get global configuration instance"""
    global _config
    if _config is None:
        _config = Config()
    return _config


def reset_config(config_path=None):
    """Replace the global instance, e.g. after --config or in tests"""
    global _config
    _config = Config(config_path) if config_path is not None else None
    return _config
