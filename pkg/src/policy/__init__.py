from .ntk_policy import Category, FlowSpec, NtkPolicy
from .rule_table import (
    LinkState, ActionKind, StatePredicate, Header, RuleMatch, RuleAction, FlowRule, RuleTable,
    LEGACY, match_rule, dump_tables,
    PRIORITY_NTK_DROP, PRIORITY_FAILOVER, PRIORITY_NTK_FORWARD, PRIORITY_PRIMARY
)
from .policy_compiler import (
    CoverageReport, WalkOutcome, FlowWalk, NtkViolation, enforcement_point, enforcement_coverage,
    compile_policy, walk_flow, verify_ntk, current_link_states, DEFAULT_TTL
)
