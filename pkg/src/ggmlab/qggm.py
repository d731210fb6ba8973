"""Quantum generic-group oracle: query unitaries over a state vector.

The session owns the quantum state, the query counters and the transcript.
Query layers act on all K query registers at once; a width-1 session is the
plain single-query model.  The parallel group operation is all-or-nothing
per branch: if any register writes a slot that another register (or itself)
reads or writes, the whole layer does nothing on that branch.

A `MemoryPolicy` splits the table into t quantum slots and classical slots
beyond them, optionally with a QRACM window of r elements declared per query
as an index set J.
"""
from __future__ import annotations

import copy
import json
import random
from dataclasses import dataclass

from .errors import BudgetExceeded, DomainError, PolicyViolation, ValidationError
from .group import GroupSpec, OpCounters
from . import programs as prog
from .state import (Registers, StateVector, all_registers, apply_basis_map,
                    apply_unitary, collapse, initial_state,
                    marginal_distribution, sample_outcome)


@dataclass(frozen=True)
class MemoryPolicy:
    """Quantum-slot count t and QRACM capacity r (in group elements)."""
    t: int
    r: int = 0
    enabled: bool = True

    def __post_init__(self):
        if self.enabled and (self.t < 1 or self.r < 0):
            raise DomainError("memory policy needs t >= 1 and r >= 0")


def classify_query(policy: MemoryPolicy, kind: str,
                   branch_triples: set[tuple[int, int, int]],
                   qracm: frozenset[int] | None = None) -> str:
    """Classify a query under the policy or raise PolicyViolation.

    Quantum queries must fit the quantum-slot option (all indices within the
    t quantum slots) or the quantum-classical option (writes within quantum
    slots, classical operands from a declared QRACM set J with |J| <= r, or a
    single fixed classical index when J is implicit).  Measured classical
    queries are always admissible and classify by their slots.
    """
    if not policy.enabled:
        return "unrestricted"
    t = policy.t
    if kind == "classical":
        return "classical_slots"
    is_all = {tr[1] for tr in branch_triples}
    js_all = {tr[2] for tr in branch_triples}
    if all(i <= t for i in is_all) and all(j <= t for j in js_all):
        return "quantum_slots"
    if any(i > t for i in is_all):
        raise PolicyViolation(
            f"quantum query writes classical slot(s) {sorted(i for i in is_all if i > t)}; "
            f"no access option permits this (t={t})")
    classical_js = {j for j in js_all if j > t}
    window = qracm if qracm is not None else frozenset(classical_js)
    if any(j <= t for j in window):
        raise PolicyViolation(f"QRACM set {sorted(window)} must lie beyond slot t={t}")
    if len(window) > policy.r:
        raise PolicyViolation(
            f"QRACM set of size {len(window)} exceeds capacity r={policy.r}")
    stray = classical_js - set(window)
    if stray:
        raise PolicyViolation(
            f"classical operand index(es) {sorted(stray)} outside declared QRACM set "
            f"{sorted(window)}")
    return "quantum_classical"


def _layer_valid(q: tuple) -> bool:
    is_ = [tr[1] for tr in q]
    js = {tr[2] for tr in q}
    return len(set(is_)) == len(is_) and not (set(is_) & js)


def group_layer(state: StateVector, adder) -> StateVector:
    """The parallel group-operation unitary with a pluggable entry adder."""
    new: dict = {}
    for cfg, amp in state.amps.items():
        w, q, t = cfg
        if _layer_valid(q):
            tl = list(t)
            for b, i, j in q:
                tl[i - 1] = adder(t[i - 1], t[j - 1], b)
            cfg = (w, q, tuple(tl))
        new[cfg] = new.get(cfg, 0.0) + amp
    return StateVector(state.regs, new).check_norm()


def equality_layer(state: StateVector) -> StateVector:
    """Per-register XOR of the sign bit with the entry-equality bit."""
    new: dict = {}
    for cfg, amp in state.amps.items():
        w, q, t = cfg
        q2 = tuple((b ^ (1 if t[i - 1] == t[j - 1] else 0), i, j) for b, i, j in q)
        new[(w, q2, t)] = amp
    return StateVector(state.regs, new)


class QuantumSession:
    """Execution context for one generic algorithm in the quantum model."""

    def __init__(self, spec: GroupSpec, table, *, w_dims=(), width: int = 1,
                 table_size: int | None = None, work=None,
                 counters: OpCounters | None = None,
                 policy: MemoryPolicy | None = None):
        size = table_size if table_size is not None else max(len(table), 1)
        self.spec = spec
        self.regs = Registers(spec, tuple(w_dims), width, size)
        self.state = initial_state(self.regs, table, work)
        self.counters = counters if counters is not None else OpCounters()
        self.policy = policy
        self.transcript: list[dict] = []
        self.quantum_budget: int | None = None
        self.budget_mode: str | None = None

    @classmethod
    def for_program(cls, program: prog.Program, inputs,
                    counters: OpCounters | None = None,
                    policy: MemoryPolicy | None = None) -> "QuantumSession":
        if len(inputs) != program.num_inputs:
            raise DomainError(f"program expects {program.num_inputs} inputs")
        return cls(program.spec, list(inputs), w_dims=program.w_dims,
                   width=program.width, table_size=program.table_size,
                   counters=counters, policy=policy)

    def fork(self) -> "QuantumSession":
        dup = object.__new__(QuantumSession)
        dup.spec = self.spec
        dup.regs = self.regs
        dup.state = self.state  # states are immutable values
        dup.counters = copy.copy(self.counters)
        dup.policy = self.policy
        dup.transcript = list(self.transcript)
        dup.quantum_budget = self.quantum_budget
        dup.budget_mode = self.budget_mode
        return dup

    # -- local operations -------------------------------------------------

    def apply_unitary(self, targets, matrix) -> None:
        self.state = apply_unitary(self.state, list(targets), matrix)

    def apply_map(self, targets, fn) -> None:
        self.state = apply_basis_map(self.state, list(targets), fn)

    # -- oracle queries ----------------------------------------------------

    def _value_adder(self):
        n = self.spec.order
        return lambda xi, xj, b: (xi + xj) % n if b == 0 else (xi - xj) % n

    def _branch_triples(self) -> set:
        out = set()
        for cfg in self.state.amps:
            out.update(cfg[1])
        return out

    def _record(self, kind: str, **extra) -> None:
        rec = {"kind": kind, "depth_layer": self.counters.quantum_depth,
               "width": self.regs.width}
        rec.update(extra)
        self.transcript.append(rec)

    def _charge_quantum(self) -> None:
        if self.quantum_budget is not None:
            used = sum(1 for r in self.transcript if r["kind"] == "group_op")
            if used >= self.quantum_budget:
                raise BudgetExceeded(
                    f"{self.budget_mode or 'quantum'} budget of {self.quantum_budget} "
                    f"layers exhausted")

    def group_op(self, qracm: frozenset[int] | None = None) -> None:
        self._charge_quantum()
        if self.policy is not None:
            classify_query(self.policy, "quantum", self._branch_triples(), qracm)
        self.state = group_layer(self.state, self._value_adder())
        self.counters.count_quantum(self.regs.width)
        self._record("group_op", qracm=sorted(qracm) if qracm else None)

    def equality(self) -> None:
        self.state = equality_layer(self.state)
        self.counters.count_equality(self.regs.width)
        self._record("equality")

    def classical_group_op(self, mode: str = "sample", rng: random.Random | None = None
                           ) -> list[tuple["QuantumSession", float]]:
        """Measured group operation on query register 0 (Q, then operands).

        Returns weighted continuations: one per measurement outcome in
        enumerate mode, a single sampled one otherwise.
        """
        trip_dist = marginal_distribution(self.state, [("q", 0)])
        picks = (sorted(trip_dist.items())
                 if mode == "enumerate" else [_sample_item(trip_dist, rng)])
        out = []
        for (triple,), p in picks:
            sess = self.fork() if (mode == "enumerate" and len(trip_dist) > 1) else self
            sess.state = collapse(sess.state, [("q", 0)], (triple,))
            b, i, j = triple
            if i == j:
                sess.counters.count_classical()
                sess._record("classical_op", measured=[b, i, j], operands=None)
                out.append((sess, p))
                continue
            op_dist = marginal_distribution(sess.state, [("t", i), ("t", j)])
            sub = (sorted(op_dist.items())
                   if mode == "enumerate" else [_sample_item(op_dist, rng)])
            for operands, p2 in sub:
                s3 = sess.fork() if (mode == "enumerate" and len(op_dist) > 1) else sess
                s3.state = collapse(s3.state, [("t", i), ("t", j)], operands)
                s3.state = _plain_op_register0(s3.state, s3._value_adder())
                s3.counters.count_classical()
                s3._record("classical_op", measured=[b, i, j], operands=list(operands))
                if s3.policy is not None:
                    classify_query(s3.policy, "classical", {triple})
                out.append((s3, p * p2))
        return out

    def table_op(self, b: int, i: int, j: int, k: int) -> None:
        """Overwrite T(k); valid only while the state is fully classical."""
        if not self.state.is_basis_state():
            raise ValidationError("table overwrite requires a fully classical state")
        w, q, t = self.state.sole_config()
        for idx in (i, j, k):
            if not 1 <= idx <= self.regs.table_size:
                raise DomainError(f"table index {idx} out of range")
        n = self.spec.order
        tl = list(t)
        tl[k - 1] = (t[i - 1] + (-1) ** b * t[j - 1]) % n
        self.state = StateVector(self.regs, {(w, q, tuple(tl)): 1.0 + 0.0j})
        self.counters.count_classical()
        self._record("table_op", args=[b, i, j, k])

    # -- measurement and output --------------------------------------------

    def measure_registers(self, selector, rng: random.Random):
        dist = marginal_distribution(self.state, list(selector))
        outcome = sample_outcome(dist, rng)
        self.state = collapse(self.state, list(selector), outcome)
        return outcome, dist[outcome]

    def forced_measure(self, mode: str = "sample", rng: random.Random | None = None
                       ) -> list[tuple["QuantumSession", float]]:
        sel = all_registers(self.regs)
        dist = marginal_distribution(self.state, sel)
        picks = (sorted(dist.items()) if mode == "enumerate" else [_sample_item(dist, rng)])
        out = []
        for outcome, p in picks:
            sess = self.fork() if (mode == "enumerate" and len(dist) > 1) else self
            sess.state = collapse(sess.state, sel, outcome)
            sess._record("forced_measure")
            out.append((sess, p))
        return out

    def snapshot(self) -> dict:
        """Classical snapshot of a fully measured state."""
        w, q, t = self.state.sole_config()
        return {"w": list(w), "q": [list(x) for x in q], "t": list(t)}

    def table_values(self) -> tuple[int, ...]:
        return self.state.sole_config()[2]

    # -- program execution --------------------------------------------------

    def step(self, instr, mode: str, rng: random.Random | None):
        if isinstance(instr, prog.Unitary):
            self.apply_unitary(instr.targets, instr.matrix)
        elif isinstance(instr, prog.BasisMap):
            self.apply_map(instr.targets, instr.fn)
        elif isinstance(instr, prog.GroupOp):
            self.group_op(instr.qracm)
        elif isinstance(instr, prog.EqualityOp):
            self.equality()
        elif isinstance(instr, prog.ClassicalGroupOp):
            return self.classical_group_op(mode, rng)
        elif isinstance(instr, prog.TableOp):
            self.table_op(instr.b, instr.i, instr.j, instr.k)
        elif isinstance(instr, prog.ForcedMeasure):
            return self.forced_measure(mode, rng)
        else:
            raise DomainError(f"unknown instruction {instr!r}")
        return [(self, 1.0)]

    def output_distribution(self, out: prog.OutputSpec, mode: str = "enumerate",
                            rng: random.Random | None = None) -> dict:
        sel = list(out.selector) if out.kind == "classical" else [("t", out.index)]
        dist = marginal_distribution(self.state, sel)
        if out.kind == "group":
            dist = {v: p for (v,), p in dist.items()}
        if mode == "sample":
            outcome = _sample_item(dist, rng)[0]
            return {outcome: 1.0}
        return dist

    def transcript_json(self) -> str:
        return json.dumps(self.transcript, sort_keys=True)


def _plain_op_register0(state: StateVector, adder) -> StateVector:
    new: dict = {}
    for cfg, amp in state.amps.items():
        w, q, t = cfg
        b, i, j = q[0]
        if i != j:
            tl = list(t)
            tl[i - 1] = adder(t[i - 1], t[j - 1], b)
            cfg = (w, q, tuple(tl))
        new[cfg] = new.get(cfg, 0.0) + amp
    return StateVector(state.regs, new).check_norm()


def _sample_item(dist: dict, rng: random.Random | None):
    rng = rng if rng is not None else random.Random(0)
    outcome = sample_outcome(dist, rng)
    return outcome, dist[outcome]


__all__ = ["MemoryPolicy", "classify_query", "QuantumSession",
           "group_layer", "equality_layer"]
