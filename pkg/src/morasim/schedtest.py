"""Processor sizing and offline-speed feasibility validation.

Only the density-based sufficient test is implemented: a task set whose
speed-scaled densities are all at most 1 is schedulable on m processors by a
global FJP scheduler if

    sum_i C_i/(s_i D_i)  <=  m (1 - max_i C_i/(s_i D_i)) + max_i C_i/(s_i D_i)

The test is sufficient, not necessary: instances exist that it rejects at an
m on which they nevertheless schedule (the two-processor worked example in
the test suite is one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

from ._rat import ONE, ZERO
from .model import ModelError, ProcessorModel, Task, UnknownSpeedError

__all__ = ["SizingResult", "UnschedulableError", "density_test", "min_processors", "validate_offline_speeds"]


class UnschedulableError(ModelError):
    """No processor count can pass the density test for this input."""


@dataclass(frozen=True)
class SizingResult:
    m: int
    test_used: str
    margin: object  # slack of the passing inequality


def _scaled_densities(tasks: Sequence[Task], speed_of):
    return [t.wcet / (speed_of(t) * t.deadline) for t in tasks]


def density_test(tasks: Sequence[Task], m: int, s=ONE) -> bool:
    """Pass iff the set is density-schedulable on m processors with every
    task's execution scaled by speed s. Empty sets pass trivially."""
    if m < 1:
        raise ModelError("need at least one processor")
    if not ZERO < s <= ONE:
        raise ModelError(f"speed scale must be in (0, 1], got {s}")
    if not tasks:
        return True
    dens = _scaled_densities(tasks, lambda t: s)
    if any(d > ONE for d in dens):
        return False
    d_max = max(dens)
    return sum(dens) <= m * (ONE - d_max) + d_max


def min_processors(tasks: Sequence[Task]) -> SizingResult:
    """Smallest m passing the density test at full speed.

    Closed form m = max(1, ceil((d_sum - d_max)/(1 - d_max))) when d_max < 1,
    cross-checked against the predicate. With d_max = 1 the test's right-hand
    side is constant, so only sets with d_sum <= 1 are sizeable at all.
    """
    if not tasks:
        return SizingResult(m=1, test_used="density", margin=ONE)
    dens = [t.wcet / t.deadline for t in tasks]
    bad = [t.id for t, d in zip(tasks, dens) if d > ONE]
    if bad:
        raise UnschedulableError(f"tasks {bad} have density > 1 and can never meet deadlines")
    d_sum = sum(dens)
    d_max = max(dens)
    if d_max == ONE:
        if d_sum <= ONE:
            m = 1
        else:
            raise UnschedulableError(
                "density test cannot bound m: maximal density is 1 and total density exceeds 1"
            )
    else:
        m = max(1, int(math.ceil((d_sum - d_max) / (ONE - d_max))))
        while not density_test(tasks, m):  # guard against ceil edge cases
            m += 1
    if not density_test(tasks, m):
        raise UnschedulableError("density test rejected the closed-form m")
    margin = m * (ONE - d_max) + d_max - d_sum
    return SizingResult(m=m, test_used="density", margin=margin)


def validate_offline_speeds(
    tasks: Sequence[Task],
    assignment: Union[Mapping[int, object], object],
    m: int,
    model: Optional[ProcessorModel] = None,
) -> bool:
    """Check that per-task offline speeds keep the set density-schedulable on
    m processors. `assignment` maps task id to a speed, or is a single speed
    applied to every task. With a model given, each speed must be a table
    member."""
    if m < 1:
        raise ModelError("need at least one processor")
    if not tasks:
        return True

    if isinstance(assignment, Mapping):
        def speed_of(t: Task):
            try:
                return assignment[t.id]
            except KeyError:
                raise ModelError(f"no offline speed assigned to task {t.id}") from None
    else:
        def speed_of(t: Task):
            return assignment

    for t in tasks:
        s = speed_of(t)
        if not ZERO < s <= ONE:
            raise ModelError(f"offline speed {s} for task {t.id} is out of (0, 1]")
        if model is not None and s not in model.power:
            raise UnknownSpeedError(f"offline speed {s} for task {t.id} is not in the table")
    dens = _scaled_densities(tasks, speed_of)
    if any(d > ONE for d in dens):
        return False
    d_max = max(dens)
    return sum(dens) <= m * (ONE - d_max) + d_max
