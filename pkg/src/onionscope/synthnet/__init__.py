"""Deterministic synthetic onion-web generator used as the test oracle.

Everything here is derived from a single integer seed: domain names, page
bodies, images, the transaction chain, churn schedules, and scanner
verdicts. The generated world implements the fetch backend contract, and
its ground-truth manifest is what acceptance tests compare pipeline output
against.
"""

from .chain import ChainPlan, ChainTruth, generate_chain
from .world import (
    GroundTruth,
    SpecInfeasible,
    SyntheticBackend,
    World,
    WorldSpec,
    generate,
    load_world,
    save_world,
)

__all__ = [
    "ChainPlan",
    "ChainTruth",
    "generate_chain",
    "GroundTruth",
    "SpecInfeasible",
    "SyntheticBackend",
    "World",
    "WorldSpec",
    "generate",
    "load_world",
    "save_world",
]
