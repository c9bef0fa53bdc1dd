from .config import ExperimentConfig
from .report import ExperimentReport, Verdict
from .runners import (
    run_clt,
    run_counting,
    run_fluctuation,
    run_interlacing,
    run_rigidity,
    run_universality,
    run_variance_slope,
)
