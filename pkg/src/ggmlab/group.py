"""Group descriptors and query counters.

All group arithmetic in this package is additive over Z_N: the generator is
1, the identity is 0, and "multiplying" two elements means adding their
exponents mod N.
"""
from __future__ import annotations

from dataclasses import dataclass, field


def is_prime(n: int) -> bool:
    """Deterministic primality check, adequate for desk-scale orders."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class GroupSpec:
    """Cyclic group of a given order; `prime` is validated eagerly."""

    order: int
    prime: bool = False

    def __post_init__(self):
        if self.order < 2:
            raise ValueError(f"group order must be >= 2, got {self.order}")
        if self.prime and not is_prime(self.order):
            raise ValueError(f"order {self.order} declared prime but is composite")

    @classmethod
    def of(cls, order: int) -> "GroupSpec":
        """Build a spec, detecting primality."""
        return cls(order, is_prime(order))

    def reduce(self, x: int) -> int:
        return x % self.order


@dataclass
class OpCounters:
    """Query accounting.

    Equality queries are tracked but never enter a complexity total.  All
    counts are monotone over a run; `merge` folds per-trial counters into an
    aggregate.
    """

    classical_ops: int = 0
    quantum_ops: int = 0
    quantum_depth: int = 0
    equality_queries: int = 0
    parallel_width_max: int = 0

    def count_classical(self, n: int = 1) -> None:
        self.classical_ops += n

    def count_quantum(self, width: int = 1) -> None:
        self.quantum_ops += width
        self.quantum_depth += 1
        if width > self.parallel_width_max:
            self.parallel_width_max = width

    def count_equality(self, n: int = 1) -> None:
        self.equality_queries += n

    @property
    def total_group_ops(self) -> int:
        return self.classical_ops + self.quantum_ops

    def snapshot(self) -> dict:
        return {
            "classical_ops": self.classical_ops,
            "quantum_ops": self.quantum_ops,
            "quantum_depth": self.quantum_depth,
            "equality_queries": self.equality_queries,
            "parallel_width_max": self.parallel_width_max,
            "total_group_ops": self.total_group_ops,
        }

    def merge(self, other: "OpCounters") -> None:
        self.classical_ops += other.classical_ops
        self.quantum_ops += other.quantum_ops
        self.quantum_depth += other.quantum_depth
        self.equality_queries += other.equality_queries
        self.parallel_width_max = max(self.parallel_width_max, other.parallel_width_max)

    def delta(self, earlier: dict) -> dict:
        now = self.snapshot()
        return {k: now[k] - earlier.get(k, 0) for k in now}


__all__ = ["GroupSpec", "OpCounters", "is_prime"]
