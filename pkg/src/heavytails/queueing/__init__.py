from .des import QueueConfig, TaskRecord, DesResult, run_des
from .profiles import (frontier, analytic_ltp_edf, analytic_ltp_fcfs,
                       snapshot_compare)
from .boxma import boxma_h, boxma_tail, ros_mm1_tail, fcfs_mm1_tail
from .aging import AgingConfig, aging_stationary, aging_evolve

__all__ = [
    "QueueConfig", "TaskRecord", "DesResult", "run_des",
    "frontier", "analytic_ltp_edf", "analytic_ltp_fcfs", "snapshot_compare",
    "boxma_h", "boxma_tail", "ros_mm1_tail", "fcfs_mm1_tail",
    "AgingConfig", "aging_stationary", "aging_evolve",
]
