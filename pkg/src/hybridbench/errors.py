"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: config errors exit 2, I/O errors
exit 3, oracle failures exit 4.
"""

from __future__ import annotations


class HybridBenchError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(HybridBenchError):
    """The configuration is missing, inconsistent, or names an unknown workload."""


class DataIOError(HybridBenchError):
    """An input or output file is missing, unreadable, or malformed."""


class OracleMismatch(HybridBenchError):
    """A computed result disagrees with its correctness oracle."""


class StructuralError(HybridBenchError):
    """A data structure violates its invariants (malformed CSR, cyclic task
    graph, broken linked list, overlapping timeline intervals)."""


class NumericError(HybridBenchError):
    """A numerical kernel produced a non-finite value."""


class TaskExecutionError(HybridBenchError):
    """A task body raised during schedule execution.

    Carries the id of the failing task and the ids of downstream tasks
    that were consequently not run.
    """

    def __init__(self, task_id: str, cause: BaseException, skipped: tuple[str, ...] = ()):
        self.task_id = task_id
        self.cause = cause
        self.skipped = skipped
        msg = f"task {task_id!r} failed: {cause!r}"
        if skipped:
            msg += f" (skipped downstream: {', '.join(skipped)})"
        super().__init__(msg)
