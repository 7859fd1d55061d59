from .config import config, Config, PROJECT_ROOT, SCENARIO_DIR
