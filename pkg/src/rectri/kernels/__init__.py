from .base import DEFAULT_TILE_LIMIT, trmm_base, trsm_base
from .simulator import (
    HazardReport,
    KernelTrace,
    WorkgroupProgram,
    build_trsm_program,
    drop_barrier,
    exhaustive_schedules,
    simulate,
)

__all__ = [
    "DEFAULT_TILE_LIMIT",
    "HazardReport",
    "KernelTrace",
    "WorkgroupProgram",
    "build_trsm_program",
    "drop_barrier",
    "exhaustive_schedules",
    "simulate",
    "trmm_base",
    "trsm_base",
]
