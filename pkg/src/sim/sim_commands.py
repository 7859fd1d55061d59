import logging
from pathlib import Path

from cli.common import add_common_arguments, scenario_from_args, write_output
from cli.csv_output import emit_csv
from sim.engine import compare_modes, run
from sim.scenario import ReactionMode

logger = logging.getLogger(__name__)


def run_simulate(args) -> int:
    scenario = scenario_from_args(args)
    mode = ReactionMode(args.mode) if args.mode else None
    trace, metrics = run(scenario, args.seed, mode)
    write_output(emit_csv(metrics), args.out)
    if args.out is not None:
        write_output(trace.text(), str(Path(args.out)) + '.trace')
    return 0


def run_compare(args) -> int:
    scenario = scenario_from_args(args)
    results = compare_modes(scenario)
    write_output(emit_csv(results), args.out)
    return 0


def setup_sim_commands(subparsers):
    parser = subparsers.add_parser('simulate', help='run the discrete-event simulation in one reaction mode')
    add_common_arguments(parser)
    parser.add_argument('--mode', choices=[m.value for m in ReactionMode], help='reaction mode (default: [params])')
    parser.add_argument('--seed', type=int, metavar='N', help='random seed (default: [params])')
    parser.set_defaults(handler=run_simulate)

    parser = subparsers.add_parser('compare', help='run every reaction mode on the same scenario and seed')
    add_common_arguments(parser)
    parser.set_defaults(handler=run_compare)
