from .scenario_file import (
    parse_scenario, render_scenario, load_scenario, resolve_scenario_path, bundled_scenarios, SECTIONS
)
from .csv_output import emit_csv, METRICS_COLUMNS, PLAN_COLUMNS, PLACEMENT_COLUMNS, TABLE_COLUMNS
from .common import add_common_arguments, scenario_from_args, write_output
