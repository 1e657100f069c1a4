# /prefix_filter/utils/config.py
"""
Prefix Filter Configuration Utilities
Features: JSON Config File, Built-In Defaults, Environment Override, Global Manager.
"""

import json
import logging
import os

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "PREFIX_FILTER_CONFIG"
DEFAULT_CONFIG_FILE = "prefix_filter_config.json"

DEFAULTS = {
    "bin_capacity": 25,
    "quotient_range": 25,
    "remainder_bits": 8,
    "max_load_factor": 0.95,
    "spare_kind": "bbf",
    "spare_slack": 1.1,
    "spare_sizing": "expected",  # or "worst_case"
    "bbf_bits_per_key": 12,
    "bbf_probes": 8,
    "bbf_headroom": 2.0,
    "exact_headroom": 1 / 0.935,
    "seed": 0x5EED,
    "bench_n": 1 << 22,
    "bench_rounds": 20,
    "log_level": "WARNING",
}

SPARE_SIZINGS = ("expected", "worst_case")


class ConfigManager:
    """
    Config manager for filter and bench defaults.
    - Built-in defaults, overridden by a JSON file when one exists.
    - Nothing is written to disk until save_config() is called.
    """

    def __init__(self, config_file: str = None):
        self.config_file = config_file or os.environ.get(CONFIG_ENV_VAR, DEFAULT_CONFIG_FILE)
        self._load_or_create_config()

    def _load_or_create_config(self):
        """Load the JSON config over the defaults."""
        self.config = dict(DEFAULTS)
        if os.path.exists(self.config_file):
            with open(self.config_file, "r", encoding="utf-8") as f:
                overrides = json.load(f)
            if not isinstance(overrides, dict):
                raise ValueError(f"Config file {self.config_file} must hold a JSON object")
            self.config.update(overrides)
            logger.info("Loaded config overrides from %s: %s", self.config_file, sorted(overrides))

    def save_config(self):
        """Write the current config as JSON."""
        with open(self.config_file, "w", encoding="utf-8") as f:
            json.dump(self.config, f, indent=2, sort_keys=True)

    def update_setting(self, key: str, value):
        """Update a config setting and persist it."""
        self.config[key] = value
        self.save_config()

    def reset(self):
        """Drop in-memory overrides (the file on disk is left alone)."""
        self.config = dict(DEFAULTS)


# Global Instance
config_manager = ConfigManager()


# Convenience Functions
def get_config(key: str):
    """Get a config value."""
    return config_manager.config.get(key)


def set_config(key: str, value):
    """Set a config value."""
    config_manager.update_setting(key, value)


# Example Usage (Run this to test)
if __name__ == "__main__":
    print(f"Config file: {config_manager.config_file}")
    for key in sorted(config_manager.config):
        print(f"  {key} = {config_manager.config[key]}")
