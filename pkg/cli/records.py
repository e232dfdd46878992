import logging

from cli.models import ConcurrenceRecord
from entanglement.concurrence import global_purity, trajectory_pairwise
from evolution.models import Trajectory

logger = logging.getLogger(__name__)


def trajectory_records(trajectory: Trajectory):
    """One ConcurrenceRecord per snapshot, flags carried over from the reductions."""
    records = []
    for t, snapshot, pairwise in zip(
        trajectory.times, trajectory.snapshots, trajectory_pairwise(trajectory)
    ):
        records.append(
            ConcurrenceRecord(
                t=float(t),
                C_AF1=pairwise.atom_field1,
                C_AF2=pairwise.atom_field2,
                C_F1F2=pairwise.field1_field2,
                discarded_weight=pairwise.discarded_weight,
                purity=min(1.0, max(0.0, global_purity(snapshot))),
                flags=pairwise.flags,
            )
        )
    flagged = sum(1 for r in records if r.flags)
    if flagged:
        logger.warning(f"{flagged} of {len(records)} records are flagged")
    return records


def detect_sudden_death(records, column="C_AF1", run_length=3):
    """
    Finite intervals on which a concurrence column is exactly zero after
    having been positive.

    :param run_length: Minimum number of consecutive zero records.
    :return: List of (t_start, t_end) pairs.
    """
    intervals = []
    seen_positive = False
    start = None
    count = 0
    last_zero = None
    for record in records:
        value = record.value(column)
        if value == 0:
            if seen_positive:
                if start is None:
                    start, count = record.t, 0
                count += 1
                last_zero = record.t
            continue
        if start is not None and count >= run_length:
            intervals.append((start, last_zero))
        start, count = None, 0
        seen_positive = True
    if start is not None and count >= run_length:
        intervals.append((start, last_zero))
    return intervals
