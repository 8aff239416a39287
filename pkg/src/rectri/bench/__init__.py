from .harness import (
    CSV_HEADER,
    RATIO_HEADER,
    BenchConfig,
    BenchRecord,
    JoinError,
    RatioRecord,
    ValidationError,
    crossover_scan,
    ratio_report,
    run_sweep,
)
