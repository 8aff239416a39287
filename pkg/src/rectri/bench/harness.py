"""Runtime sweeps, runtime-ratio reports and threshold scans.

Every timed repetition is residual-checked (on 8 sampled right-hand sides)
before its time is kept.  Results go to CSV with fixed headers so external
baselines can be joined against local runs.
"""

from __future__ import annotations

import csv
import logging
import statistics
import time
from dataclasses import astuple, dataclass, field
from pathlib import Path

import numpy as np

from ..core import ELEM_KINDS, Backend, get_backend
from ..oracle import op_matrix, relative_residual
from ..recursion import DEFAULT_THRESHOLD, rec_trmm, rec_trsm
from ..variants import OpKind, Side, TriangularSpec

log = logging.getLogger(__name__)

CSV_HEADER = ["op", "variant", "n", "m", "threshold", "backend", "elem",
              "median_time_s", "min_time_s", "gflops"]
RATIO_HEADER = ["op", "variant", "n", "m", "baseline_s", "candidate_s", "ratio_percent"]

RESIDUAL_SAMPLES = 8
RESIDUAL_FACTOR = 64


class ValidationError(RuntimeError):
    """A timed result failed its residual check."""


class JoinError(ValueError):
    """Baseline and candidate CSVs do not cover the same keys."""


def parse_m_mode(text: str) -> tuple[str, int | None]:
    if text == "square":
        return ("square", None)
    kind, _, width = text.partition(":")
    if kind != "fixed" or not width.isdigit() or int(width) < 1:
        raise ValueError(f"m-mode must be 'square' or 'fixed:<width>', got {text!r}")
    return ("fixed", int(width))


def rhs_width(n: int, m_mode: str) -> int:
    kind, width = parse_m_mode(m_mode)
    return n if kind == "square" else width


@dataclass
class BenchConfig:
    op: OpKind
    spec: TriangularSpec
    sizes: list[int]
    m_mode: str = "fixed:256"
    threshold: int | None = DEFAULT_THRESHOLD  # None means threshold = n
    backend: str = "seq"
    reps: int = 5
    warmup: int = 2
    out: Path | None = None
    elem: str = "f32"
    seed: int = 0

    def __post_init__(self):
        self.op = OpKind(self.op)
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.warmup < 0:
            raise ValueError("warmup must be >= 0")
        if not self.sizes or min(self.sizes) < 1:
            raise ValueError("sizes must be a non-empty list of positive integers")
        if self.elem not in ELEM_KINDS:
            raise ValueError(f"elem must be one of {sorted(ELEM_KINDS)}")
        parse_m_mode(self.m_mode)


@dataclass
class BenchRecord:
    op: str
    variant: str
    n: int
    m: int
    threshold: int
    backend: str
    elem: str
    median_time_s: float
    min_time_s: float
    gflops: float


@dataclass
class RatioRecord:
    op: str
    variant: str
    n: int
    m: int
    baseline_s: float
    candidate_s: float
    ratio_percent: float = field(init=False)

    def __post_init__(self):
        self.ratio_percent = 100.0 * self.baseline_s / self.candidate_s


def flop_count(n: int, m: int) -> int:
    return n * n * m


def random_problem(spec: TriangularSpec, n: int, m: int, dtype, rng: np.random.Generator,
                   retries: int = 10):
    """Diagonally dominant A (|a_ii| = row sum + 1) and uniform B, column-major."""
    for _ in range(retries):
        A = rng.uniform(-1.0, 1.0, (n, n))
        A[np.diag_indices(n)] = np.abs(A).sum(axis=1) + 1.0
        A = np.asfortranarray(A, dtype=dtype)
        d = np.diagonal(A)
        if np.all(np.isfinite(d)) and np.all(d != 0):
            shape = (n, m) if spec.side is Side.LEFT else (m, n)
            B = np.asfortranarray(rng.uniform(-1.0, 1.0, shape), dtype=dtype)
            return A, B
    raise RuntimeError(f"could not draw a nonsingular {n}x{n} system in {retries} tries")


def _runner(op: OpKind):
    return rec_trsm if op is OpKind.TRSM else rec_trmm


def time_problem(op: OpKind, spec: TriangularSpec, A: np.ndarray, B0: np.ndarray,
                 threshold: int, backend: Backend, reps: int, warmup: int,
                 rng: np.random.Generator) -> list[float]:
    """Time ``reps`` runs after ``warmup`` untimed ones; validate every run."""
    run = _runner(op)
    n = A.shape[0]
    eps = float(np.finfo(A.dtype).eps)
    tol = RESIDUAL_FACTOR * max(n, 1) * eps
    T = op_matrix(spec, A)
    nrhs = B0.shape[1] if spec.side is Side.LEFT else B0.shape[0]
    work = np.empty_like(B0, order="F")
    times = []
    for i in range(warmup + reps):
        work[...] = B0
        t0 = time.perf_counter()
        run(spec, A, work, threshold=threshold, backend=backend)
        elapsed = time.perf_counter() - t0
        sample = rng.choice(nrhs, size=min(RESIDUAL_SAMPLES, nrhs), replace=False)
        res = relative_residual(op.value, spec, A, B0, work, sample=sample, T=T)
        if not res <= tol:
            raise ValidationError(
                f"{op.value} {spec.variant} n={n}: residual {res:.3e} exceeds {tol:.3e}")
        if i >= warmup:
            times.append(elapsed)
    return times


def run_sweep(config: BenchConfig) -> list[BenchRecord]:
    backend = get_backend(config.backend)
    dtype = ELEM_KINDS[config.elem]
    rng = np.random.default_rng(config.seed)
    records = []
    for n in config.sizes:
        m = rhs_width(n, config.m_mode)
        threshold = n if config.threshold is None else config.threshold
        A, B0 = random_problem(config.spec, n, m, dtype, rng)
        times = time_problem(config.op, config.spec, A, B0, threshold, backend,
                             config.reps, config.warmup, rng)
        median = statistics.median(times)
        rec = BenchRecord(config.op.value, config.spec.variant, n, m, threshold,
                          backend.name, config.elem, median, min(times),
                          flop_count(n, m) / median / 1e9)
        log.info("%s %s n=%d m=%d: median %.4gs (%.3g GFLOP/s)",
                 rec.op, rec.variant, n, m, median, rec.gflops)
        records.append(rec)
    if config.out is not None:
        write_csv(config.out, CSV_HEADER, records)
    return records


def write_csv(path, header: list[str], records) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for rec in records:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in astuple(rec)])


def read_records(path) -> list[BenchRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"{path}: header {reader.fieldnames} != {CSV_HEADER}")
        return [
            BenchRecord(row["op"], row["variant"], int(row["n"]), int(row["m"]),
                        int(row["threshold"]), row["backend"], row["elem"],
                        float(row["median_time_s"]), float(row["min_time_s"]),
                        float(row["gflops"]))
            for row in reader
        ]


def ratio_report(baseline_csv, candidate_csv, out=None) -> list[RatioRecord]:
    """Join two sweep CSVs on (op, variant, n, m); ratio = 100 * baseline / candidate."""
    def keyed(path):
        return {(r.op, r.variant, r.n, r.m): r for r in read_records(path)}

    base, cand = keyed(baseline_csv), keyed(candidate_csv)
    if base.keys() != cand.keys():
        missing = sorted(base.keys() ^ cand.keys())
        raise JoinError(f"keys present in only one CSV: {missing}")
    records = [RatioRecord(*key, base[key].median_time_s, cand[key].median_time_s)
               for key in sorted(base)]
    if out is not None:
        write_csv(out, RATIO_HEADER, records)
    return records


def crossover_scan(op, spec: TriangularSpec, sizes, thresholds, *, m_mode: str = "fixed:256",
                   backend: str = "seq", reps: int = 5, warmup: int = 2, elem: str = "f32",
                   seed: int = 0) -> list[tuple[int, int, float]]:
    """Median time for every (n, threshold); a threshold of ``None`` means ``n``."""
    op = OpKind(op)
    be = get_backend(backend)
    rng = np.random.default_rng(seed)
    table = []
    for n in sizes:
        A, B0 = random_problem(spec, n, rhs_width(n, m_mode), ELEM_KINDS[elem], rng)
        for t in thresholds:
            t = n if t is None else t
            times = time_problem(op, spec, A, B0, t, be, reps, warmup, rng)
            table.append((n, t, statistics.median(times)))
    return table
