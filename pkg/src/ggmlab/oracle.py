"""Classical generic-group oracle.

The oracle keeps a table of Z_N residues indexed by positive integers.  A
group-operation query overwrites T(k) := T(i) + (-1)^b T(j); an equality
query compares two entries for free.  Algorithms never see the residues
themselves, only the indices, unless they ask for an output.
"""
from __future__ import annotations

from .errors import DomainError
from .group import GroupSpec, OpCounters


class GroupOracle:
    """Maurer-style oracle handle for one game instance.

    The table is sparse: untouched indices read as 0, so the index space is
    unbounded at no memory cost.  One handle is single-threaded; independent
    handles never share state.
    """

    def __init__(self, spec: GroupSpec, inputs: list[int] | tuple[int, ...] = (),
                 counters: OpCounters | None = None):
        self.spec = spec
        n = spec.order
        for y in inputs:
            if not 0 <= y < n:
                raise DomainError(f"input {y} outside [0, {n})")
        self.table: dict[int, int] = {i + 1: y for i, y in enumerate(inputs)}
        self.num_inputs = len(inputs)
        self.counters = counters if counters is not None else OpCounters()
        self._next_scratch = max(self.num_inputs + 1, 1)

    def _check_index(self, i: int) -> None:
        if i < 1:
            raise DomainError(f"table index must be >= 1, got {i}")

    def get(self, i: int) -> int:
        """Raw table read; oracle-internal (referees and simulators only)."""
        self._check_index(i)
        return self.table.get(i, 0)

    def group_op(self, b: int, i: int, j: int, k: int) -> None:
        """Overwrite T(k) := T(i) + (-1)^b T(j).  Counts one classical op."""
        for idx in (i, j, k):
            self._check_index(idx)
        if b not in (0, 1):
            raise DomainError(f"sign bit must be 0 or 1, got {b}")
        n = self.spec.order
        v = (self.table.get(i, 0) + (-1) ** b * self.table.get(j, 0)) % n
        if v:
            self.table[k] = v
        else:
            self.table.pop(k, None)
        self.counters.count_classical()

    def equal(self, i: int, j: int) -> int:
        """Return 1 iff T(i) = T(j).  Free apart from the equality counter."""
        self._check_index(i)
        self._check_index(j)
        self.counters.count_equality()
        return 1 if self.table.get(i, 0) == self.table.get(j, 0) else 0

    def output(self, i: int) -> int:
        """Read T(i) as the game output; not a counted query."""
        self._check_index(i)
        return self.table.get(i, 0)

    def fresh_index(self) -> int:
        """Next unused index past everything written so far."""
        while self.table.get(self._next_scratch, 0) != 0 or self._next_scratch <= self.num_inputs:
            self._next_scratch += 1
        idx = self._next_scratch
        self._next_scratch += 1
        return idx

    def zero_index(self) -> int:
        """An index that is guaranteed to read 0 (and is kept unwritten)."""
        return self.fresh_index()

    def nonzero_indices(self) -> list[int]:
        return sorted(i for i, v in self.table.items() if v != 0)

    def plant(self, value: int) -> int:
        """Referee-side: place a value at a hidden index without counting.

        This exists so game referees can check answers (e.g. materialize a
        target element) without giving the adversary a free query.  Not part
        of the adversary-facing surface.
        """
        if not 0 <= value < self.spec.order:
            raise DomainError(f"value {value} outside [0, {self.spec.order})")
        idx = self.fresh_index()
        if value:
            self.table[idx] = value
        return idx


__all__ = ["GroupOracle"]
