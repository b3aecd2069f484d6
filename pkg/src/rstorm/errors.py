"""Exception types shared across the package."""

from __future__ import annotations


class RStormError(Exception):
    """Base class for all errors raised by this package."""


class TopologyError(RStormError):
    """Raised when an operation needs a valid topology and gets an invalid one."""

    def __init__(self, violations):
        self.violations = list(violations)
        summary = "; ".join(str(v) for v in self.violations) or "invalid topology"
        super().__init__(summary)


class ClusterError(RStormError):
    """Raised for malformed clusters and unknown node or rack ids."""


class HardConstraintViolation(RStormError):
    """A placement would exceed a node's residual memory."""

    def __init__(self, task, node_id, available, required):
        self.task = task
        self.node_id = node_id
        self.available = available
        self.required = required
        super().__init__(
            f"task {task} needs {required} MB but node {node_id!r} has {available} MB free"
        )


class Unschedulable(RStormError):
    """No node in the cluster can satisfy a task's memory demand."""

    def __init__(self, task):
        self.task = task
        super().__init__(f"no node can host task {task}")


class MissingInput(RStormError):
    """A referenced spec file or fixture does not exist."""


class SpecFormatError(RStormError):
    """A spec document is structurally malformed."""
