"""
Gauss-Legendre tables shared by the oracles, the kernel and the kinetic embedding.

Long oscillatory segments are covered by composite panels of PANEL_NODES nodes
each, so no rule larger than SINGLE_RULE_LIMIT is ever diagonalised.
"""
import math
from functools import lru_cache
from typing import Tuple

import numpy as np

PANEL_NODES = 64
SINGLE_RULE_LIMIT = 512


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1], computed once per n"""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def resolving_nodes(phase_span: float, minimum: int = 32) -> int:
    """Enough nodes to resolve phase_span radians of oscillation"""
    return max(minimum, int(math.ceil(0.75 * phase_span)) + 32)


def segment_rule(n: int, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
    """At least n nodes on [a, b]: one rule up to SINGLE_RULE_LIMIT, equal panels beyond"""
    if n <= SINGLE_RULE_LIMIT:
        # rounded up so nearby requests share a cached table
        nodes, weights = gauss_legendre(16 * int(math.ceil(n / 16)))
        half = 0.5 * (b - a)
        return half * nodes + 0.5 * (a + b), half * weights

    # 2n/PANEL_NODES panels keep each panel within what PANEL_NODES nodes resolve
    panels = int(math.ceil(2.0 * n / PANEL_NODES))
    nodes, weights = gauss_legendre(PANEL_NODES)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    centres = 0.5 * (edges[1:] + edges[:-1])
    points = (np.multiply.outer(half, nodes) + centres[:, None]).ravel()
    return points, np.multiply.outer(half, weights).ravel()
