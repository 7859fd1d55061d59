import logging
import sys

from cli.common import add_common_arguments, scenario_from_args, write_output
from cli.csv_output import emit_csv
from policy.policy_compiler import compile_policy, verify_ntk
from policy.rule_table import dump_tables

logger = logging.getLogger(__name__)


def run_compile(args) -> int:
    scenario = scenario_from_args(args)
    topo = scenario.topology
    specs = scenario.flow_specs
    tables, coverage = compile_policy(scenario.policy, topo, scenario.deployment, specs)
    violations = verify_ntk(topo, scenario.deployment, scenario.policy, specs, tables, scenario.params.ttl)
    logger.info(f"[POLICY] {len(coverage.covered)} flows enforced, {len(coverage.uncovered)} unenforceable, "
                f"{len(violations)} need-to-know violations")
    sys.stdout.write(dump_tables(tables))
    if args.out is not None:
        write_output(emit_csv(tables), args.out)
    return 0


def setup_policy_commands(subparsers):
    parser = subparsers.add_parser('compile', help='compile the need-to-know policy into rule tables')
    add_common_arguments(parser)
    parser.set_defaults(handler=run_compile)
