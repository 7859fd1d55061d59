import logging

from cli.common import add_common_arguments, scenario_from_args, write_output
from cli.csv_output import emit_csv
from deployment.deployment_manager import greedy_deploy
from deployment.selectability import all_ordered_pairs
from utils.errors import SmanetError

logger = logging.getLogger(__name__)


def run_deploy(args) -> int:
    scenario = scenario_from_args(args)
    topo = scenario.topology
    budget = args.budget if args.budget is not None else scenario.params.budget
    if budget is None:
        raise SmanetError("no upgrade budget: pass --budget or set budget in [params]")
    # Flow endpoints when the scenario has traffic, every ordered pair otherwise
    pairs = list(dict.fromkeys((f.src, f.dst) for f in scenario.flows)) or all_ordered_pairs(topo.node_ids)
    plan = greedy_deploy(topo, budget, pairs, scenario.params.max_hops, scenario.params.team_budgets)
    logger.info(f"[DEPLOY] Upgrading {sorted(plan.upgrades)} gives {plan.objective} selectable paths "
                f"over {len(pairs)} pairs")
    write_output(emit_csv(plan), args.out)
    return 0


def setup_deployment_commands(subparsers):
    parser = subparsers.add_parser('deploy', help='choose the nodes to upgrade to SDN forwarding')
    add_common_arguments(parser)
    parser.add_argument('--budget', type=int, metavar='K', help='number of upgrades (default: [params] budget)')
    parser.set_defaults(handler=run_deploy)
