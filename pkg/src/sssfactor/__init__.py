"""Integer factorization via smooth subsum search.

Library entry points: factor() for full factorizations, collect_relations()
for the relation-collection phase on its own, qs_factor() for the sieve
baseline.
"""

from .engine import (
    FactorResult,
    RelationShortfall,
    RunConfig,
    RunStats,
    collect_relations,
    factor,
)
from .numtheory import FoundFactor
from .qs import qs_factor

__version__ = "0.1.0"

__all__ = [
    "FactorResult",
    "FoundFactor",
    "RelationShortfall",
    "RunConfig",
    "RunStats",
    "collect_relations",
    "factor",
    "qs_factor",
    "__version__",
]
