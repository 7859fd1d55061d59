import logging

from cli.common import add_common_arguments, scenario_from_args, write_output
from cli.csv_output import emit_csv
from placement.placement_cost import Organization, forwarders_of
from placement.placement_manager import solve_placement

logger = logging.getLogger(__name__)


def run_place(args) -> int:
    scenario = scenario_from_args(args)
    params = scenario.params
    topo = scenario.topology
    max_sites = args.max_sites if args.max_sites is not None else params.max_sites
    organization = Organization.parse(args.organization) if args.organization else params.organization
    capacity = params.capacity or max(1, len(forwarders_of(topo)))
    placement = solve_placement(topo, None, max_sites, capacity, params.cost_weights, organization,
                                params.seed, params.root, params.control_energy)
    write_output(emit_csv(placement), args.out)
    return 0


def setup_placement_commands(subparsers):
    parser = subparsers.add_parser('place', help='place controllers on candidate sites')
    add_common_arguments(parser)
    parser.add_argument('--max-sites', type=int, metavar='M', help='maximum controller sites (default: [params])')
    parser.add_argument('--organization', choices=('flat', 'hier'), help='controller organization (default: [params])')
    parser.set_defaults(handler=run_place)
