"""Enumeration caps shared across the package.

All combinatorial enumerations are exponential in the ground-set size, so
every entry point checks an explicit cap and raises :class:`CapExceeded`
instead of silently truncating.  Defaults can be overridden process-wide
through environment variables (read once at import time) or per call via
the ``cap`` keyword the enumeration functions accept.
"""

import os

__all__ = [
    "CapExceeded",
    "PARTITION_CAP",
    "GRAPH_CAP",
    "GOOD_GRAPH_CAP",
    "FLUCTUATION_CAP",
    "CHAIN_FLUCTUATION_CAP",
]


class CapExceeded(ValueError):
    """An enumeration was requested beyond its configured size cap."""


def _env_cap(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    value = int(raw)
    if value < 1:
        raise ValueError(f"{name} must be a positive integer, got {raw!r}")
    return value


#: Largest ground set for partition / annular-permutation enumeration.
PARTITION_CAP = _env_cap("WIGNERFLUCT_PARTITION_CAP", 10)

#: Largest ground set for non-crossing graph enumeration.
GRAPH_CAP = _env_cap("WIGNERFLUCT_GRAPH_CAP", 9)

#: Largest outer+inner size for the good-graph multiset.
GOOD_GRAPH_CAP = _env_cap("WIGNERFLUCT_GOOD_GRAPH_CAP", 6)

#: Largest left+right size for the scalar fluctuation-moment recursion.
FLUCTUATION_CAP = _env_cap("WIGNERFLUCT_FLUCTUATION_CAP", 7)

#: Largest left+right size for the matrix-valued fluctuation recursion.
CHAIN_FLUCTUATION_CAP = _env_cap("WIGNERFLUCT_CHAIN_FLUCTUATION_CAP", 6)


def check_cap(size: int, cap: int, what: str) -> None:
    if size > cap:
        raise CapExceeded(f"{what}: size {size} exceeds cap {cap}")
