import json
import os
import logging
from pathlib import Path

from src.config import limits

logger = logging.getLogger(__name__)

CONFIG_DIR = Path(os.path.expanduser("~/.config/egglam"))
CONFIG_FILE = CONFIG_DIR / "config.json"

DEFAULT_CONFIG = {
    "beta": True,
    "eta": False,
    "iter_limit": limits.ITER_LIMIT,
    "node_limit": limits.NODE_LIMIT,
    "time_limit_ms": limits.TIME_LIMIT_MS,
    "explain_grace": limits.EXPLAIN_GRACE,
    "annotate_bvars": False,
    "proof_heads": [],
    "oracle_max_depth": limits.ORACLE_MAX_DEPTH,
    "oracle_max_term_size": limits.ORACLE_MAX_TERM_SIZE,
    "oracle_max_states": limits.ORACLE_MAX_STATES,
}

# Problem files spell keys with dashes.
PROBLEM_KEYS = {
    "beta": "beta",
    "eta": "eta",
    "iter-limit": "iter_limit",
    "node-limit": "node_limit",
    "time-limit-ms": "time_limit_ms",
    "explain-grace": "explain_grace",
    "annotate-bvars": "annotate_bvars",
    "proof-heads": "proof_heads",
}


class ConfigManager:
    """Layered settings: defaults, then a JSON file, then explicit overrides."""

    def __init__(self, path=None):
        self.path = Path(path) if path else CONFIG_FILE
        self._load()

    def _load(self):
        self._config = DEFAULT_CONFIG.copy()
        if self.path.exists():
            try:
                with open(self.path, 'r') as f:
                    data = json.load(f)
                    self._config.update({k: v for k, v in data.items() if k in DEFAULT_CONFIG})
            except Exception as e:
                logger.error(f"Failed to load config {self.path}: {e}")

    def save(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            with open(self.path, 'w') as f:
                json.dump(self._config, f, indent=4, sort_keys=True)
        except Exception as e:
            logger.error(f"Failed to save config: {e}")

    def get(self, key):
        return self._config.get(key)

    def set(self, key, value):
        if key not in DEFAULT_CONFIG:
            raise KeyError(f"Unknown config key: {key}")
        self._config[key] = value

    def update(self, overrides):
        """Applies a dict of overrides, skipping None values (unset flags)."""
        for key, value in overrides.items():
            if value is not None:
                self.set(key, value)

    def as_dict(self):
        return dict(self._config)

    @property
    def beta(self): return bool(self.get("beta"))

    @property
    def eta(self): return bool(self.get("eta"))

    @property
    def annotate_bvars(self): return bool(self.get("annotate_bvars"))

    @property
    def proof_heads(self): return frozenset(self.get("proof_heads") or ())
