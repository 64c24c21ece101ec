"""Hybrid two-device computing library and benchmark harness.

Two solution styles over a modeled CPU-plus-accelerator platform:
calibrated work sharing (split one data-parallel computation so both
devices finish together) and task-parallel DAG mapping (place
inter-dependent tasks on the device each suits best). Nine workloads
exercise both, and the harness reports gain and idle-time metrics.
"""

from .config import BenchmarkSuite, ExperimentConfig, ShareSpec
from .errors import (
    ConfigError,
    DataIOError,
    HybridBenchError,
    NumericError,
    OracleMismatch,
    StructuralError,
    TaskExecutionError,
)
from .platform import (
    Accounting,
    Device,
    DeviceId,
    Interval,
    Platform,
    Timeline,
    TransferLink,
    merge_timelines,
    modeled_compute_time,
    modeled_transfer_time,
)
from .taskgraph import (
    Edge,
    Schedule,
    Task,
    TaskGraph,
    critical_path,
    execute_schedule,
    lower_bound,
    map_tasks,
    schedule_to_timeline,
    schedule_with_assignment,
    validate_schedule,
)
from .worksharing import (
    CalibrationProbe,
    RunReport,
    ShareOrigin,
    WorkShare,
    calibrate,
    compute_gain,
    compute_idle,
    formula_share,
    run_workshared,
    split_fraction_formula,
)

__version__ = "0.1.0"
