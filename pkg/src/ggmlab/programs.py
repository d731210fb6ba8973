"""Generic oracle programs: a small instruction set over (W, Q, T).

A program is the oracle-facing skeleton of a generic algorithm: local
unitaries and basis permutations on W and Q, the four query types, and an
output declaration.  The same program runs against the true quantum session
and against the label-table simulator, which is what makes exact
distribution comparison possible.

Sessions are duck-typed: anything with `step(instr, mode, rng)` returning a
list of (session, probability) continuations and `output_distribution(out)`
can execute a program.  `mode` is "sample" (one continuation, randomness from
`rng`) or "enumerate" (measurements fan out over all outcomes).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SizeError
from .group import GroupSpec
from .state import ZERO_TRIPLE, Coord, validate_unitary


@dataclass(frozen=True)
class Unitary:
    """Arbitrary unitary on a W/Q subspace (identity on T)."""
    targets: tuple[Coord, ...]
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        validate_unitary(self.matrix)


@dataclass(frozen=True)
class BasisMap:
    """Basis permutation on a W/Q subspace, given as a callable on the
    target-value tuple.  Used for classical wiring such as digit-controlled
    query loading; involutions can be re-applied to unload."""
    targets: tuple[Coord, ...]
    fn: object
    label: str = ""


@dataclass(frozen=True)
class GroupOp:
    """One (parallel) group-operation query layer across all Q registers.

    Counts `width` toward quantum ops and one layer toward depth.  `qracm`
    optionally declares the classical index set J for memory-policy checks.
    """
    qracm: frozenset[int] | None = None


@dataclass(frozen=True)
class EqualityOp:
    """Equality query layer: XORs each register's bit with [x_i = x_j].  Free."""


@dataclass(frozen=True)
class ClassicalGroupOp:
    """Measured group operation: Q register 0 is measured, then the operand
    table entries, then the group-operation unitary is applied."""


@dataclass(frozen=True)
class TableOp:
    """Overwrite-style table operation T(k) := T(i) + (-1)^b T(j).

    Legal only while every involved register is classical (the state is a
    single basis configuration); used for precomputation phases before any
    coherence exists."""
    b: int
    i: int
    j: int
    k: int


@dataclass(frozen=True)
class ForcedMeasure:
    """Measure every register in the computational basis."""


Instruction = object


@dataclass(frozen=True)
class OutputSpec:
    """What the algorithm announces at the end.

    kind "classical": measure `selector` (W coordinates) and output the tuple.
    kind "group": output the group element held at table index `index`.
    """
    kind: str
    selector: tuple[Coord, ...] = ()
    index: int = 0

    def __post_init__(self):
        if self.kind not in ("classical", "group"):
            raise DomainError(f"unknown output kind {self.kind!r}")
        if self.kind == "classical" and not self.selector:
            raise DomainError("classical output needs a selector")
        if self.kind == "group" and self.index < 1:
            raise DomainError("group output needs a table index >= 1")


@dataclass
class Program:
    """A generic algorithm skeleton plus its register geometry."""
    name: str
    spec: GroupSpec
    num_inputs: int
    w_dims: tuple[int, ...]
    width: int
    table_size: int
    instructions: list
    output: OutputSpec

    def quantum_layers(self) -> int:
        return sum(1 for ins in self.instructions if isinstance(ins, GroupOp))

    def quantum_ops(self) -> int:
        return self.quantum_layers() * self.width

    def classical_ops_declared(self) -> int:
        return sum(1 for ins in self.instructions
                   if isinstance(ins, (ClassicalGroupOp, TableOp)))

    def tag_sequence(self) -> list[str]:
        tags = []
        for ins in self.instructions:
            if isinstance(ins, GroupOp):
                tags.append("quantum")
            elif isinstance(ins, (ClassicalGroupOp, TableOp)):
                tags.append("classical")
        return tags


def run_collect(program: Program, session, mode: str = "enumerate",
                rng: random.Random | None = None, branch_cap: int = 200_000):
    """Execute a program and return (output distribution, finished sessions).

    In "enumerate" mode the run forks at every measurement with more than one
    outcome, so the returned distribution is exact.  In "sample" mode a
    single trajectory is followed using `rng` and the distribution is the
    point mass on the sampled output.
    """
    if mode not in ("enumerate", "sample"):
        raise DomainError(f"unknown run mode {mode!r}")
    if mode == "sample" and rng is None:
        rng = random.Random(0)
    branches = [(session, 1.0)]
    for instr in program.instructions:
        nxt = []
        for sess, p in branches:
            for sess2, p2 in sess.step(instr, mode, rng):
                nxt.append((sess2, p * p2))
        branches = nxt
        if len(branches) > branch_cap:
            raise SizeError(f"enumeration exceeded {branch_cap} run branches")
    dist: dict = {}
    for sess, p in branches:
        for outcome, q in sess.output_distribution(program.output, mode, rng).items():
            dist[outcome] = dist.get(outcome, 0.0) + p * q
    return dist, [s for s, _ in branches]


def mixing_unitary(dim: int, support: list[int]) -> np.ndarray:
    """Fourier mixing on a subset of basis indices, identity elsewhere."""
    m = np.eye(dim, dtype=complex)
    k = len(support)
    if k >= 2:
        w = np.exp(2j * np.pi / k)
        block = np.array([[w ** (a * b) for b in range(k)] for a in range(k)]) / np.sqrt(k)
        for a, ia in enumerate(support):
            for b, ib in enumerate(support):
                m[ia, ib] = block[a, b]
    return m


def swap_with_zero(triple_by_control):
    """Involutive Q loader: swaps the idle triple with a control-selected one.

    `triple_by_control` maps the control value to the triple to load; a
    missing or identical entry leaves the register idle.  Applying the same
    map again restores the idle triple, which is how queries are unloaded.
    """
    def fn(values):
        *ctrl, q = values
        target = triple_by_control(tuple(ctrl)) if callable(triple_by_control) \
            else triple_by_control.get(tuple(ctrl))
        if target is None or target == ZERO_TRIPLE:
            return values
        if q == ZERO_TRIPLE:
            return (*ctrl, target)
        if q == target:
            return (*ctrl, ZERO_TRIPLE)
        return values
    return fn


def load_layer(regs_width: int, controls: tuple[Coord, ...],
               loader_by_register: dict[int, object], label: str = "") -> BasisMap:
    """BasisMap loading several Q registers from shared W controls at once."""
    def fn(values):
        ctrl = values[:len(controls)]
        qs = list(values[len(controls):])
        for k, loader in loader_by_register.items():
            sub = loader((*ctrl, qs[k]))
            qs[k] = sub[-1]
        return (*ctrl, *qs)
    targets = tuple(controls) + tuple(("q", k) for k in range(regs_width))
    return BasisMap(targets=targets, fn=fn, label=label)


def random_generic_program(spec: GroupSpec, m: int, depth: int, width: int,
                           seed: int, equality_layers: int | None = None) -> Program:
    """Random generic program used by the equivalence and budget suites.

    Exercises superposed queries, shared controls, degenerate i = j branches
    and parallel-validity violations; exactly `depth` group-operation layers.
    """
    rng = random.Random(seed)
    s = m + width * depth + 2
    w_dims = (2, 2)
    instructions: list = []

    def rand_triple():
        return (rng.randrange(2), rng.randrange(1, s + 1), rng.randrange(1, s + 1))

    n_eq = equality_layers if equality_layers is not None else rng.randrange(0, 2)
    layers = ["g"] * depth + ["e"] * n_eq
    rng.shuffle(layers)
    for layer in layers:
        wbit = rng.randrange(2)
        hd = mixing_unitary(2, [0, 1])
        instructions.append(Unitary(targets=(("w", wbit),), matrix=hd, label="mix-w"))
        loaders = {}
        for k in range(width):
            t0, t1 = rand_triple(), rand_triple()
            loaders[k] = swap_with_zero({(0,): t0, (1,): t1})
        load = load_layer(width, (("w", wbit),), loaders, label="load-q")
        instructions.append(load)
        instructions.append(GroupOp() if layer == "g" else EqualityOp())
        instructions.append(load)  # involution: unload

    if rng.random() < 0.5:
        out = OutputSpec(kind="classical", selector=(("w", 0), ("w", 1)))
    else:
        out = OutputSpec(kind="group", index=rng.randrange(1, s + 1))
    return Program(
        name=f"random-m{m}-d{depth}-K{width}-seed{seed}",
        spec=spec, num_inputs=m, w_dims=w_dims, width=width,
        table_size=s, instructions=instructions, output=out,
    )


__all__ = [
    "Unitary", "BasisMap", "GroupOp", "EqualityOp", "ClassicalGroupOp",
    "TableOp", "ForcedMeasure", "OutputSpec", "Program", "run_collect",
    "mixing_unitary", "swap_with_zero", "load_layer", "random_generic_program",
]
