from scr.cli.schemas.config import (
    AssouadTask,
    BoundId,
    BoxTask,
    CapacityTask,
    CheckTask,
    FourierMeasure,
    FourierTask,
    IntermediateTask,
    ReferenceTask,
    RunConfig,
    SweepTask,
)
from scr.cli.schemas.summary import CloudSummary, RunSummary, TaskStatus, TaskSummary

__all__ = [
    "AssouadTask",
    "BoundId",
    "BoxTask",
    "CapacityTask",
    "CheckTask",
    "CloudSummary",
    "FourierMeasure",
    "FourierTask",
    "IntermediateTask",
    "ReferenceTask",
    "RunConfig",
    "RunSummary",
    "SweepTask",
    "TaskStatus",
    "TaskSummary",
]
