"""
Exception hierarchy shared by every package.

Library code raises these; only the command-line entry point catches them and
turns them into an exit status.
"""

from typing import Optional


class SmanetError(Exception):
    """Base error for the toolkit"""
    def __init__(self, message, original_exception=None):
        self.message = message
        self.original_exception = original_exception
        super().__init__(self.message)


class UnknownNodeError(SmanetError):
    def __init__(self, node_id):
        self.node_id = node_id
        super().__init__(f"unknown node {node_id}")


class UnknownLinkError(SmanetError):
    def __init__(self, a, b):
        self.link = (a, b)
        super().__init__(f"unknown link {a}-{b}")


class UnreachableError(SmanetError):
    def __init__(self, src, dst):
        self.src = src
        self.dst = dst
        super().__init__(f"node {dst} is unreachable from node {src}")


class InvalidPathError(SmanetError):
    pass


class InstanceTooLargeError(SmanetError):
    def __init__(self, subsets: int, cap: int):
        self.subsets = subsets
        self.cap = cap
        super().__init__(f"instance needs {subsets} candidate subsets, enumeration cap is {cap}")


class PlacementInfeasibleError(SmanetError):
    pass


class InvalidPlacementError(SmanetError):
    pass


class RuleConflictError(SmanetError):
    def __init__(self, node_id, match, actions):
        self.node_id = node_id
        self.match = match
        self.actions = actions
        super().__init__(f"conflicting actions {actions} for overlapping matches {match} at node {node_id}")


class PolicyError(SmanetError):
    pass


class LinkMismatchError(SmanetError):
    pass


class ScenarioInvalidError(SmanetError):
    pass


class ScenarioParseError(SmanetError):
    """Malformed scenario text; `line` is 1-based (0 when the whole file is at fault)"""
    def __init__(self, line: int, reason: str, original_exception: Optional[Exception] = None):
        self.line = line
        self.reason = reason
        where = f"line {line}: " if line else ""
        super().__init__(f"{where}{reason}", original_exception)


class ScenarioSemanticError(ScenarioParseError):
    """Well-formed scenario text that references something that does not exist"""
