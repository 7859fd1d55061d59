from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Tuple

from utils.errors import PolicyError


@dataclass(frozen=True)
class Category:
    """A class of information (identity credentials, location data, ...) and its access id"""
    name: str
    access_id: int


@dataclass(frozen=True)
class FlowSpec:
    src: int
    dst: int
    category: str


@dataclass(frozen=True)
class NtkPolicy:
    """
    Need-to-know policy: which teams may receive which access ids.

    Anything not granted through a clearance is denied.
    """
    categories: Tuple[Category, ...] = ()
    clearances: Mapping[str, FrozenSet[int]] = field(default_factory=dict)

    def __post_init__(self):
        names = [c.name for c in self.categories]
        if len(set(names)) != len(names):
            raise PolicyError("duplicate category name")
        ids = [c.access_id for c in self.categories]
        if len(set(ids)) != len(ids):
            raise PolicyError("access ids must be unique per category")
        object.__setattr__(self, 'clearances',
                           {team: frozenset(ids) for team, ids in self.clearances.items()})

    @classmethod
    def build(cls, categories: Mapping[str, int], clearances: Mapping[str, Iterable[int]]) -> 'NtkPolicy':
        return cls(tuple(Category(n, a) for n, a in categories.items()),
                   {team: frozenset(ids) for team, ids in clearances.items()})

    def access_id(self, category: str) -> int:
        for c in self.categories:
            if c.name == category:
                return c.access_id
        raise PolicyError(f"unknown category '{category}'")

    def category_of(self, access_id: int) -> Optional[str]:
        for c in self.categories:
            if c.access_id == access_id:
                return c.name
        return None

    def is_cleared(self, team: Optional[str], access_id: int) -> bool:
        if team is None:
            return False
        return access_id in self.clearances.get(team, frozenset())

    def validate(self, teams: Iterable[str]) -> None:
        known = set(teams)
        for team, ids in self.clearances.items():
            if team not in known:
                raise PolicyError(f"clearance for unknown team '{team}'")
            for access in ids:
                if self.category_of(access) is None:
                    raise PolicyError(f"team '{team}' cleared for undefined access id {access}")

    def summary(self) -> Dict[str, list]:
        return {team: sorted(ids) for team, ids in sorted(self.clearances.items())}
