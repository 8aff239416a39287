"""Barrier-semantics workgroup simulator.

A :class:`WorkgroupProgram` is a list of phases; consecutive phases are
separated by a workgroup barrier.  Inside a phase every thread runs its body
to completion in an order chosen by the schedule, and every load/store is
recorded.  Two accesses by different threads conflict when they touch the
same location, at least one is a store, and nothing orders them: same group
and same phase, or (global memory only) different groups in any phase.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, NamedTuple

import numpy as np

from ..errors import TileSizeError
from ..variants import Side, TriangularSpec
from .base import DEFAULT_TILE_LIMIT, reduce_to_lower_left

ThreadId = tuple[int, int]  # (group, thread)
Location = tuple


class Access(NamedTuple):
    phase: int
    location: Location
    kind: str  # "r" or "w"


class Hazard(NamedTuple):
    location: Location
    thread_a: ThreadId
    thread_b: ThreadId
    phase: int


@dataclass
class KernelTrace:
    accesses: dict[ThreadId, list[Access]] = field(default_factory=dict)

    def record(self, tid: ThreadId, access: Access) -> None:
        self.accesses.setdefault(tid, []).append(access)

    def active_threads(self, phase: int, group: int = 0) -> list[int]:
        return sorted(t for (g, t), acc in self.accesses.items()
                      if g == group and any(a.phase == phase for a in acc))


@dataclass
class HazardReport:
    hazards: list[Hazard] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.hazards

    def __len__(self):
        return len(self.hazards)

    def __iter__(self):
        return iter(self.hazards)


class ThreadContext:
    """What a phase body sees: its ids plus recorded loads and stores."""

    def __init__(self, sim: "_Machine", group: int, tid: int, phase: int):
        self._sim = sim
        self.group = group
        self.tid = tid
        self.phase = phase

    def _loc(self, name: str, idx) -> Location:
        if name in self._sim.shared:
            return ("shared", self.group, name, idx)
        return ("global", name, idx)

    def load(self, name: str, idx):
        self._sim.trace.record((self.group, self.tid), Access(self.phase, self._loc(name, idx), "r"))
        return self._sim.memory(name, self.group)[idx]

    def store(self, name: str, idx, value) -> None:
        self._sim.trace.record((self.group, self.tid), Access(self.phase, self._loc(name, idx), "w"))
        self._sim.memory(name, self.group)[idx] = value


Phase = Callable[[ThreadContext], None]


@dataclass
class WorkgroupProgram:
    group_count: int
    threads_per_group: int
    shared_slots: dict[str, int]
    phases: list[Phase]
    inputs: dict[str, np.ndarray]
    output: str = "B"

    @property
    def barrier_count(self) -> int:
        return max(len(self.phases) - 1, 0)


class _Machine:
    def __init__(self, program: WorkgroupProgram):
        self.globals = {k: np.array(v, copy=True) for k, v in program.inputs.items()}
        dtype = self.globals[program.output].dtype
        self.shared = {
            name: [np.zeros(length, dtype=dtype) for _ in range(program.group_count)]
            for name, length in program.shared_slots.items()
        }
        self.trace = KernelTrace()

    def memory(self, name: str, group: int) -> np.ndarray:
        if name in self.shared:
            return self.shared[name][group]
        return self.globals[name]


class SimulationResult(NamedTuple):
    result: np.ndarray
    trace: KernelTrace
    hazards: HazardReport


def _phase_orders(program: WorkgroupProgram, schedule) -> Iterator[list[list[int]]]:
    """Yield, per phase, one thread order per group."""
    T, G = program.threads_per_group, program.group_count
    identity = list(range(T))
    if schedule is None:
        for _ in program.phases:
            yield [identity] * G
    elif isinstance(schedule, (int, np.integer)):
        rng = np.random.default_rng(int(schedule))
        for _ in program.phases:
            yield [list(rng.permutation(T)) for _ in range(G)]
    else:
        if len(schedule) != len(program.phases):
            raise ValueError("schedule needs one thread order per phase")
        for perm in schedule:
            perm = list(perm)
            if sorted(perm) != identity:
                raise ValueError(f"{perm} is not a permutation of {T} threads")
            yield [perm] * G


def find_hazards(trace: KernelTrace) -> HazardReport:
    by_loc: dict[Location, list[tuple[ThreadId, Access]]] = {}
    for tid, accesses in trace.accesses.items():
        for acc in accesses:
            by_loc.setdefault(acc.location, []).append((tid, acc))
    found = set()
    for loc, uses in by_loc.items():
        writes = [u for u in uses if u[1].kind == "w"]
        if not writes:
            continue
        for (ta, aa), (tb, ab) in itertools.product(writes, uses):
            if ta == tb:
                continue
            unordered = ta[0] != tb[0] or aa.phase == ab.phase
            if unordered:
                a, b = sorted((ta, tb))
                found.add(Hazard(loc, a, b, min(aa.phase, ab.phase)))
    return HazardReport(sorted(found, key=repr))


def simulate(program: WorkgroupProgram, schedule=None) -> SimulationResult:
    """Run ``program`` phase by phase.

    ``schedule`` is ``None`` (thread order 0..T-1), an integer seed (an
    independent random order per phase and group), or a sequence holding one
    permutation per phase applied to every group.
    """
    machine = _Machine(program)
    for p, (body, orders) in enumerate(zip(program.phases, _phase_orders(program, schedule))):
        for g, order in enumerate(orders):
            for t in order:
                body(ThreadContext(machine, g, int(t), p))
    return SimulationResult(machine.globals[program.output], machine.trace,
                            find_hazards(machine.trace))


def exhaustive_schedules(program: WorkgroupProgram) -> Iterator[list[list[int]]]:
    """Every distinct per-phase ordering of the threads that do work.

    Threads with no accesses in a phase commute with everything in it, so
    only the active ones are permuted; idle threads keep their slots at the
    end.  The same order is applied to every group: groups share no memory
    (the hazard check verifies this for global memory).
    """
    probe = simulate(program).trace
    per_phase = []
    for p in range(len(program.phases)):
        active = probe.active_threads(p)
        idle = [t for t in range(program.threads_per_group) if t not in active]
        per_phase.append([list(perm) + idle for perm in itertools.permutations(active)])
    for combo in itertools.product(*per_phase):
        yield list(combo)


def drop_barrier(program: WorkgroupProgram, index: int) -> WorkgroupProgram:
    """Fuse phases ``index`` and ``index + 1``, deleting the barrier between them."""
    first, second = program.phases[index], program.phases[index + 1]

    def fused(ctx: ThreadContext) -> None:
        first(ctx)
        second(ctx)

    phases = program.phases[:index] + [fused] + program.phases[index + 2:]
    return replace(program, phases=phases)


def _index_maps(spec: TriangularSpec, n: int):
    """Map core (row, col) of the reduced lower-left problem to real A/B indices."""
    ar = np.arange(n * n).reshape(n, n)
    L, _, reflected = reduce_to_lower_left(spec, ar, np.empty((n, 0) if spec.side is Side.LEFT else (0, n)))

    def a_index(r: int, c: int) -> tuple[int, int]:
        return divmod(int(L[r, c]), n)

    def b_index(r: int, g: int) -> tuple[int, int]:
        r = n - 1 - r if reflected else r
        return (r, g) if spec.side is Side.LEFT else (g, r)

    return a_index, b_index


def build_trsm_program(spec: TriangularSpec, n: int, m: int, A=None, B=None, *,
                       threads_per_group: int | None = None,
                       tile_limit: int = DEFAULT_TILE_LIMIT,
                       dtype=np.float64, seed: int = 0) -> WorkgroupProgram:
    """Base TRSM as a workgroup program: one group per right-hand side, one thread per row.

    Phase 0 loads the diagonal and the row-normalised right-hand side into
    shared memory.  Phase ``i`` (``1 <= i < n``) has every row ``r >= i``
    eliminate the contribution of row ``i - 1``, which became final at the
    previous barrier; thread ``i`` then writes its finished row back.
    Missing A/B default to a seeded diagonally dominant system.
    """
    if n > tile_limit:
        raise TileSizeError(f"tile of size {n} exceeds base-kernel limit {tile_limit}")
    threads = threads_per_group or n
    if threads < n:
        raise ValueError("need at least one thread per row")
    if A is None or B is None:
        rng = np.random.default_rng(seed)
        if A is None:
            A = rng.uniform(-1, 1, (n, n))
            A[np.diag_indices(n)] = np.abs(A).sum(axis=1) + 1
        if B is None:
            B = rng.uniform(-1, 1, (n, m) if spec.side is Side.LEFT else (m, n))
    A = np.array(A, dtype=dtype, order="F")
    B = np.array(B, dtype=dtype, order="F")

    a_index, b_index = _index_maps(spec, n)
    alpha = B.dtype.type(spec.alpha)
    unit = spec.unit

    def load_phase(ctx: ThreadContext) -> None:
        r, g = ctx.tid, ctx.group
        if r >= n:
            return
        b = ctx.load("B", b_index(r, g))
        if spec.alpha != 1:
            b = b * alpha
        if not unit:
            d = ctx.load("A", a_index(r, r))
            ctx.store("diag", r, d)
            b = b / d
        ctx.store("B_c", r, b)
        if r == 0:
            ctx.store("B", b_index(r, g), b)

    def elimination_phase(i: int) -> Phase:
        def body(ctx: ThreadContext) -> None:
            r, g = ctx.tid, ctx.group
            if r < i or r >= n:
                return
            a = ctx.load("A", a_index(r, i - 1))
            if not unit:
                a = a / ctx.load("diag", r)
            ctx.store("A_col", r, a)
            b = ctx.load("B_c", r) - ctx.load("A_col", r) * ctx.load("B_c", i - 1)
            ctx.store("B_c", r, b)
            if r == i:
                ctx.store("B", b_index(r, g), b)
        return body

    phases = [load_phase] + [elimination_phase(i) for i in range(1, n)]
    return WorkgroupProgram(
        group_count=m,
        threads_per_group=threads,
        shared_slots={"diag": n, "B_c": n, "A_col": n},
        phases=phases,
        inputs={"A": A, "B": B},
    )
