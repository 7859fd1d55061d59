from .errors import (
    SmanetError, UnknownNodeError, UnknownLinkError, UnreachableError, InvalidPathError,
    InstanceTooLargeError, PlacementInfeasibleError, InvalidPlacementError, RuleConflictError,
    PolicyError, LinkMismatchError, ScenarioInvalidError, ScenarioParseError, ScenarioSemanticError
)
