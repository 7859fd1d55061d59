import logging
import sys
from pathlib import Path
from typing import Optional

from cli.scenario_file import load_scenario
from sim.scenario import Scenario
from utils.errors import SmanetError

logger = logging.getLogger(__name__)


def add_common_arguments(parser) -> None:
    parser.add_argument('--scenario', required=True, metavar='FILE',
                        help='scenario file (bundled names resolve under scenarios/)')
    parser.add_argument('--out', metavar='FILE', help='write CSV here instead of stdout')
    parser.add_argument('--max-hops', type=int, metavar='H',
                        help='path-length bound for selectable paths (default: diameter + 2)')


def scenario_from_args(args) -> Scenario:
    scenario = load_scenario(args.scenario)
    if args.max_hops is not None:
        if args.max_hops < 1:
            raise SmanetError(f"--max-hops must be >= 1, got {args.max_hops}")
        scenario = scenario.with_params(max_hops=args.max_hops)
    return scenario


def write_output(text: str, out: Optional[str], stream=None) -> None:
    """Write to the --out file (UTF-8, LF) or to stdout"""
    if out is None:
        (stream or sys.stdout).write(text)
        return
    path = Path(out)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
    except OSError as e:
        raise SmanetError(f"cannot write {path}: {e}", e)
    logger.info(f"[CLI] Wrote {path}")
