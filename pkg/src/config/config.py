import logging
from pathlib import Path
from dotenv import dotenv_values

logger = logging.getLogger(__name__)

# Get the project root directory (2 levels up from this file)
PROJECT_ROOT = Path(__file__).parent.parent.parent.absolute()

# Bundled scenarios
SCENARIO_DIR = PROJECT_ROOT / 'scenarios'

# Settings file (dotenv syntax); the process environment is never consulted
SETTINGS_FILE = PROJECT_ROOT / 'smanet.env'

_TRUE_VALUES = {'1', 'true', 'yes', 'on'}


class Config:
    def __init__(self, settings_file: Path = SETTINGS_FILE):
        self.settings_file = settings_file
        self.log_level = 'INFO'
        self.enumeration_cap = 200_000
        self.parallel_runs = True
        self.trace_checkpoint_ms = 1000.0
        self.load_config()

    def load_config(self):
        """Load all configuration from the settings file"""
        values = self._read_settings()
        self._load_log_level(values)
        self._load_enumeration_cap(values)
        self._load_parallel_runs(values)
        self._load_trace_checkpoint(values)

    def _read_settings(self) -> dict:
        if not self.settings_file.exists():
            logger.debug(f"[CONFIG] Settings file not found at {self.settings_file}, using defaults")
            return {}
        try:
            values = dotenv_values(self.settings_file)
            logger.debug(f"[CONFIG] Loaded {len(values)} settings from {self.settings_file}")
            return values
        except Exception as e:
            logger.warning(f"[CONFIG] Error reading {self.settings_file}: {e}")
            return {}

    def _load_log_level(self, values: dict):
        level = (values.get('SMANET_LOG_LEVEL') or self.log_level).upper()
        if not isinstance(logging.getLevelName(level), int):
            logger.warning(f"[CONFIG] Unknown SMANET_LOG_LEVEL '{level}', keeping {self.log_level}")
            return
        self.log_level = level

    def _load_enumeration_cap(self, values: dict):
        raw = values.get('SMANET_ENUMERATION_CAP')
        if not raw:
            return
        try:
            cap = int(raw)
        except ValueError:
            logger.warning(f"[CONFIG] SMANET_ENUMERATION_CAP is not an integer: {raw}")
            return
        if cap <= 0:
            logger.warning(f"[CONFIG] SMANET_ENUMERATION_CAP must be positive, got {cap}")
            return
        self.enumeration_cap = cap

    def _load_parallel_runs(self, values: dict):
        raw = values.get('SMANET_PARALLEL_RUNS')
        if raw:
            self.parallel_runs = raw.strip().lower() in _TRUE_VALUES

    def _load_trace_checkpoint(self, values: dict):
        raw = values.get('SMANET_TRACE_CHECKPOINT_MS')
        if not raw:
            return
        try:
            interval = float(raw)
        except ValueError:
            logger.warning(f"[CONFIG] SMANET_TRACE_CHECKPOINT_MS is not a number: {raw}")
            return
        if not interval > 0:
            logger.warning(f"[CONFIG] SMANET_TRACE_CHECKPOINT_MS must be positive, got {raw}")
            return
        self.trace_checkpoint_ms = interval


# Create a singleton instance
config = Config()
