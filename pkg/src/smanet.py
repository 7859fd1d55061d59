import argparse
import logging
import sys
import traceback

# Import configuration
from config.config import config

# Import modules
from deployment.deployment_commands import setup_deployment_commands
from placement.placement_commands import setup_placement_commands
from policy.policy_commands import setup_policy_commands
from sim.sim_commands import setup_sim_commands
from utils.errors import SmanetError

logger = logging.getLogger('smanet')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='smanet',
        description='Deployment, controller placement, need-to-know compilation and failure-reaction '
                    'simulation for SDN-enabled tactical MANETs')
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND', required=True)
    setup_deployment_commands(subparsers)
    setup_placement_commands(subparsers)
    setup_policy_commands(subparsers)
    setup_sim_commands(subparsers)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=config.log_level, format='%(asctime)s %(levelname)s %(name)s: %(message)s',
                        stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except SmanetError as e:
        print(f"error: {e.message}", file=sys.stderr)
        if e.original_exception is not None:
            logger.debug(f"[CLI] Caused by: {e.original_exception!r}")
        return 1
    except Exception:
        logger.error(f"[CLI] Unexpected failure in '{args.command}':\n{traceback.format_exc()}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
