from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class PrecisionPolicy:
    """Tolerances and truncation budget applied to every quadrature.

    ``tail_ratio`` is the fraction of ``abs_tol`` a discarded tail may
    contribute before truncation is accepted.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_nodes: int = 400_000
    tail_ratio: float = 0.1

    def __post_init__(self):
        if not self.abs_tol >= 10 * _EPS:
            raise ValueError(f"abs_tol must be >= {10 * _EPS:.3g}, got {self.abs_tol}")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if int(self.max_nodes) != self.max_nodes or self.max_nodes < 64:
            raise ValueError("max_nodes must be an integer >= 64")
        if not 0 < self.tail_ratio < 1:
            raise ValueError("tail_ratio must lie in (0, 1)")

    def with_abs_tol(self, abs_tol: float) -> "PrecisionPolicy":
        return PrecisionPolicy(abs_tol, self.rel_tol, self.max_nodes, self.tail_ratio)


DEFAULT_POLICY = PrecisionPolicy()
