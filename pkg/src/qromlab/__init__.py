"""Desk-scale compressed-oracle laboratory.

Exact simulation of the purified and compressed random oracle with parallel
queries, exhaustive classical and quantum transition capacities on micro
instances, closed-form query-complexity bound evaluators, and a complete
non-interactive Simple Proof of Sequential Work with its security-analysis
extraction algorithm.
"""

from . import bounds, capacity, groups, oracle, posw, properties, reporting

__version__ = "0.1.0"

__all__ = [
    "bounds",
    "capacity",
    "groups",
    "oracle",
    "posw",
    "properties",
    "reporting",
    "__version__",
]
