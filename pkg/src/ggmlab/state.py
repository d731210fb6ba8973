"""Sparse state-vector simulation over the (W, Q, T) register triple.

A basis configuration is (w, q, t): a tuple of work-register values, K query
triples (b, i, j), and s table residues mod N.  States are sparse maps from
configurations to complex amplitudes; only configurations with nonzero
amplitude are stored.  Work slots carry their own dimension so a slot can
hold a full Z_N value (needed to apply the N-point Fourier transform as one
exact unitary).

States are values: every operation returns a new state and never mutates its
input, so states can be shared freely across threads and trials.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .group import GroupSpec

NORM_TOL = 1e-9
PRUNE_TOL = 1e-12

Config = tuple  # (w: tuple[int], q: tuple[tuple[int,int,int]], t: tuple[int])
Coord = tuple   # ("w", slot) | ("q", k) | ("t", index1based)


@dataclass(frozen=True)
class Registers:
    """Session geometry: work-slot dimensions, query width K, table size s."""

    spec: GroupSpec
    w_dims: tuple[int, ...]
    width: int
    table_size: int

    def __post_init__(self):
        if self.width < 1 or self.table_size < 1:
            raise DomainError("query width and table size must be >= 1")
        for d in self.w_dims:
            if d < 2:
                raise DomainError(f"work slot dimension must be >= 2, got {d}")

    def triple_dim(self) -> int:
        return 2 * self.table_size * self.table_size

    def coord_dim(self, coord: Coord) -> int:
        kind, idx = coord
        if kind == "w":
            return self.w_dims[idx]
        if kind == "q":
            return self.triple_dim()
        if kind == "t":
            return self.spec.order
        raise DomainError(f"unknown register coordinate {coord!r}")

    def encode_triple(self, triple: tuple[int, int, int]) -> int:
        b, i, j = triple
        s = self.table_size
        return (b * s + (i - 1)) * s + (j - 1)

    def decode_triple(self, code: int) -> tuple[int, int, int]:
        s = self.table_size
        code, j = divmod(code, s)
        b, i = divmod(code, s)
        return (b, i + 1, j + 1)


ZERO_TRIPLE = (0, 1, 1)


class StateVector:
    """Sparse amplitude map over basis configurations."""

    __slots__ = ("regs", "amps")

    def __init__(self, regs: Registers, amps: dict[Config, complex]):
        self.regs = regs
        self.amps = amps

    def norm_sq(self) -> float:
        return sum((a * a.conjugate()).real for a in self.amps.values())

    def check_norm(self) -> "StateVector":
        n = self.norm_sq()
        if abs(n - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm drifted to {n}")
        return self

    def num_branches(self) -> int:
        return len(self.amps)

    def is_basis_state(self) -> bool:
        return len(self.amps) == 1

    def sole_config(self) -> Config:
        if not self.is_basis_state():
            raise ValidationError("state is in superposition")
        return next(iter(self.amps))


def initial_state(regs: Registers, table: list[int] | tuple[int, ...],
                  work: tuple[int, ...] | None = None) -> StateVector:
    """All-zero W and Q, table register loaded with `table` padded by zeros.

    `work` optionally carries a classical input string into the work
    register, as subroutines receive between forced measurements.
    """
    n = regs.spec.order
    if len(table) > regs.table_size:
        raise DomainError(f"{len(table)} table values exceed table size {regs.table_size}")
    for v in table:
        if not 0 <= v < n:
            raise DomainError(f"table value {v} outside [0, {n})")
    t = tuple(table) + (0,) * (regs.table_size - len(table))
    w = tuple(work) if work is not None else (0,) * len(regs.w_dims)
    if len(w) != len(regs.w_dims):
        raise DomainError("work string length does not match register layout")
    for v, d in zip(w, regs.w_dims):
        if not 0 <= v < d:
            raise DomainError(f"work value {v} outside its slot dimension {d}")
    q = (ZERO_TRIPLE,) * regs.width
    return StateVector(regs, {(w, q, t): 1.0 + 0.0j})


def _split_fns(regs: Registers, targets: list[Coord]):
    """Build (extract, rebuild) closures for a list of W/Q coordinates."""
    for kind, idx in targets:
        if kind == "t":
            raise ValidationError("local operations may not touch the table register")
        if kind == "w" and not 0 <= idx < len(regs.w_dims):
            raise DomainError(f"work slot {idx} out of range")
        if kind == "q" and not 0 <= idx < regs.width:
            raise DomainError(f"query register {idx} out of range")
    if len(set(targets)) != len(targets):
        raise DomainError("duplicate target coordinates")

    def extract(cfg: Config) -> tuple:
        w, q, t = cfg
        out = []
        for kind, idx in targets:
            out.append(w[idx] if kind == "w" else q[idx])
        return tuple(out)

    def rebuild(cfg: Config, values: tuple) -> Config:
        w, q, t = cfg
        w = list(w)
        q = list(q)
        for (kind, idx), v in zip(targets, values):
            if kind == "w":
                w[idx] = v
            else:
                q[idx] = v
        return (tuple(w), tuple(q), t)

    return extract, rebuild


def _local_codec(regs: Registers, targets: list[Coord]):
    """Mixed-radix encoding of the joint target value into one index."""
    dims = [regs.coord_dim(c) for c in targets]

    def encode(values: tuple) -> int:
        code = 0
        for (kind, _), v, d in zip(targets, values, dims):
            local = regs.encode_triple(v) if kind == "q" else v
            code = code * d + local
        return code

    def decode(code: int) -> tuple:
        vals = []
        for (kind, _), d in zip(reversed(targets), reversed(dims)):
            code, local = divmod(code, d)
            vals.append(regs.decode_triple(local) if kind == "q" else local)
        return tuple(reversed(vals))

    dim = 1
    for d in dims:
        dim *= d
    return encode, decode, dim


def validate_unitary(matrix: np.ndarray, tol: float = NORM_TOL) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"operator must be square, got shape {m.shape}")
    err = np.abs(m.conj().T @ m - np.eye(m.shape[0])).max()
    if err > tol:
        raise ValidationError(f"operator is not unitary (deviation {err:.3e})")
    return m


def apply_unitary(state: StateVector, targets: list[Coord], matrix: np.ndarray) -> StateVector:
    """Apply a unitary on a W/Q subspace; identity on everything else.

    Branches are grouped by their untouched coordinates and each group's
    amplitude vector is multiplied through the matrix in one stacked product.
    """
    regs = state.regs
    extract, rebuild = _split_fns(regs, targets)
    encode, decode, dim = _local_codec(regs, targets)
    m = validate_unitary(matrix)
    if m.shape[0] != dim:
        raise ValidationError(f"operator dimension {m.shape[0]} != target space {dim}")

    groups: dict[Config, dict[int, complex]] = {}
    rest_proto: dict[Config, Config] = {}
    for cfg, amp in state.amps.items():
        vals = extract(cfg)
        rest = rebuild(cfg, tuple(_zero_value(regs, c) for c in targets))
        groups.setdefault(rest, {})[encode(vals)] = amp
        rest_proto.setdefault(rest, cfg)

    rests = list(groups)
    mat = np.zeros((len(rests), dim), dtype=complex)
    for gi, rest in enumerate(rests):
        for code, amp in groups[rest].items():
            mat[gi, code] = amp
    out = mat @ m.T

    new_amps: dict[Config, complex] = {}
    for gi, rest in enumerate(rests):
        proto = rest_proto[rest]
        row = out[gi]
        for code in np.nonzero(np.abs(row) > PRUNE_TOL)[0]:
            cfg = rebuild(proto, decode(int(code)))
            new_amps[cfg] = new_amps.get(cfg, 0.0) + row[code]
    return StateVector(regs, new_amps).check_norm()


def _zero_value(regs: Registers, coord: Coord):
    return ZERO_TRIPLE if coord[0] == "q" else 0


def apply_basis_map(state: StateVector, targets: list[Coord], fn) -> StateVector:
    """Relabel basis configurations by a bijection on the target values.

    `fn` maps the tuple of current target values to new values; amplitude is
    carried over unchanged.  A collision (two branches landing on the same
    configuration) means `fn` is not injective on the support and raises.
    """
    regs = state.regs
    extract, rebuild = _split_fns(regs, targets)
    new_amps: dict[Config, complex] = {}
    for cfg, amp in state.amps.items():
        vals = fn(extract(cfg))
        ncfg = rebuild(cfg, vals)
        if ncfg in new_amps:
            raise ValidationError("basis map is not injective on the state support")
        new_amps[ncfg] = amp
    return StateVector(regs, new_amps)


def _project(regs: Registers, cfg: Config, selector: list[Coord]) -> tuple:
    w, q, t = cfg
    out = []
    for kind, idx in selector:
        if kind == "w":
            out.append(w[idx])
        elif kind == "q":
            out.append(q[idx])
        elif kind == "t":
            out.append(t[idx - 1])
        else:
            raise DomainError(f"unknown selector coordinate {(kind, idx)!r}")
    return tuple(out)


def marginal_distribution(state: StateVector, selector: list[Coord]) -> dict[tuple, float]:
    """Exact marginal outcome distribution of measuring the selector."""
    if not selector:
        raise DomainError("cannot measure an empty selector")
    probs: dict[tuple, float] = {}
    for cfg, amp in state.amps.items():
        key = _project(state.regs, cfg, selector)
        probs[key] = probs.get(key, 0.0) + (amp * amp.conjugate()).real
    total = sum(probs.values())
    if abs(total - 1.0) > NORM_TOL:
        raise ValidationError(f"marginal probabilities sum to {total}")
    return probs


def sample_outcome(dist: dict[tuple, float], rng: random.Random) -> tuple:
    r = rng.random() * sum(dist.values())
    acc = 0.0
    outcome = None
    for outcome, p in sorted(dist.items()):
        acc += p
        if r <= acc:
            return outcome
    return outcome  # numerical tail


def measure(state: StateVector, selector: list[Coord], rng: random.Random
            ) -> tuple[tuple, StateVector, float]:
    """Born-rule measurement: (outcome, collapsed state, outcome probability)."""
    dist = marginal_distribution(state, selector)
    outcome = sample_outcome(dist, rng)
    return outcome, collapse(state, selector, outcome), dist[outcome]


def collapse(state: StateVector, selector: list[Coord], outcome: tuple) -> StateVector:
    regs = state.regs
    kept = {cfg: amp for cfg, amp in state.amps.items()
            if _project(regs, cfg, selector) == outcome}
    norm = sum((a * a.conjugate()).real for a in kept.values()) ** 0.5
    if norm == 0.0:
        raise ValidationError("collapse onto a zero-probability outcome")
    return StateVector(regs, {cfg: a / norm for cfg, a in kept.items()})


def all_registers(regs: Registers) -> list[Coord]:
    sel: list[Coord] = [("w", i) for i in range(len(regs.w_dims))]
    sel += [("q", k) for k in range(regs.width)]
    sel += [("t", i) for i in range(1, regs.table_size + 1)]
    return sel


def dump_state(state: StateVector) -> list[list]:
    """Canonical debug dump: [config string, re, im] sorted by configuration."""
    rows = []
    for cfg, amp in state.amps.items():
        w, q, t = cfg
        key = json.dumps({"w": list(w), "q": [list(x) for x in q], "t": list(t)})
        rows.append([key, amp.real, amp.imag])
    rows.sort(key=lambda r: r[0])
    return rows


__all__ = [
    "Registers", "StateVector", "initial_state", "apply_unitary",
    "apply_basis_map", "marginal_distribution", "measure", "collapse",
    "sample_outcome", "all_registers", "dump_state", "validate_unitary",
    "ZERO_TRIPLE", "NORM_TOL", "PRUNE_TOL",
]
