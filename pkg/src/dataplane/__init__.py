from .stateful import (
    LinkStateMachine, BackupPlan, StatefulInstall, LoopCheck, transition, backup_next_hop,
    precompute_backup_rules, stateful_forward, install_stateful_tables, check_loop_free,
    DEFAULT_DETECTION_DELAY_MS
)
