"""Deterministic dual-schedule simulator for global preemptive DVFS
scheduling of sporadic constrained-deadline tasks, with online slack
reclamation (MORA), exact-rational timing, and the correctness invariants
checkable at run time."""

from ._rat import GMPY2_ACTIVE, INF, ONE, Q, ZERO, q
from .engine import (
    ConstPolicy,
    DeadlineMissError,
    EnergyReport,
    InvariantViolationError,
    MaxPolicy,
    MoraPolicy,
    SimResult,
    SimTrace,
    TraceError,
    Violation,
    account_energy,
    earliness,
    parse_policy,
    reclaim_candidate,
    rule1_speed,
    run,
)
from .mirror import AlphaEntry, AlphaQueue, InsertReport, MirrorError, OfflineEvent
from .model import (
    XSCALE,
    Job,
    ModelError,
    PriorityOrder,
    ProcessorModel,
    Task,
    UnknownSpeedError,
    UnreachableSpeedError,
    density,
    density_max,
    density_sum,
    energy,
    idle_energy,
    load_processor_model,
    quantize_speed,
    wcet_at_speed,
)
from .schedtest import SizingResult, UnschedulableError, density_test, min_processors, validate_offline_speeds
from .workload import (
    DEFAULT_PERIOD_POOL,
    GenSpec,
    generate_actual_times,
    generate_taskset,
    hyperperiod,
    load_actual_times,
    load_taskset,
    make_periodic_jobs,
    save_actual_times,
    save_taskset,
)

__version__ = "0.1.0"
