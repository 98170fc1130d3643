"""Seeded generation of task sets and per-job actual execution times.

Task sets are grown by drawing densities uniformly from [0.01, density_cap]
until the running total lands in the requested band [d, d+width]; a draw that
would overshoot the band's upper edge is clamped down so the total lands
exactly on that edge (redrawn when the clamp would fall below 0.01).
Periods equal deadlines and come from a finite pool so hyperperiods stay
desk-scale. All random quantities are quantized to 1/1000 rationals.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from ._rat import ONE, ZERO, q, rat_from_json
from .model import Job, ModelError, Task

__all__ = [
    "DEFAULT_PERIOD_POOL",
    "GenSpec",
    "generate_taskset",
    "generate_actual_times",
    "hyperperiod",
    "make_periodic_jobs",
    "load_taskset",
    "save_taskset",
    "taskset_to_json_obj",
    "load_actual_times",
    "save_actual_times",
]

DEFAULT_PERIOD_POOL = (q(10), q(20), q(40), q(50), q(80), q(100))

_GRID = 1000
_MIN_DENSITY = q(1, 100)


def _grid(x: float):
    """Quantize a float draw onto the 1/1000 grid, exactly."""
    return q(round(x * _GRID), _GRID)


def _regrid(value):
    """Snap an exact rational onto the 1/1000 grid (round half up)."""
    if value.denominator <= _GRID and _GRID % value.denominator == 0:
        return value
    n, d = value.numerator, value.denominator
    return q((n * _GRID * 2 + d) // (2 * d), _GRID)


@dataclass(frozen=True)
class GenSpec:
    """Parameters for one generated task set.

    band: closed interval the total density must land in.
    density_cap: upper bound of the per-task density draw (>= 0.01).
    rejection_sampling: redraw the whole overshoot instead of clamping.
    """

    band: tuple
    density_cap: object
    period_pool: tuple = DEFAULT_PERIOD_POOL
    e_range: tuple = (q("0.8"), q("1.2"))
    seed: int = 0
    rejection_sampling: bool = False

    def __post_init__(self):
        lo, hi = self.band
        if lo < ZERO or hi < lo:
            raise ModelError(f"bad density band [{lo}, {hi}]")
        if hi < _MIN_DENSITY:
            raise ModelError(f"band upper edge {hi} is below the minimum density 0.01")
        if not _MIN_DENSITY <= self.density_cap <= ONE:
            raise ModelError(f"density cap must be in [0.01, 1], got {self.density_cap}")
        if not self.period_pool:
            raise ModelError("period pool is empty")


def generate_taskset(spec: GenSpec) -> list:
    """Draw tasks until the density sum enters the band (at least one task);
    deterministic under the spec's seed."""
    rng = random.Random(spec.seed)
    lo, hi = spec.band
    cap = spec.density_cap
    cap_f = float(cap.numerator) / float(cap.denominator)
    densities = []
    total = ZERO
    rejects = 0
    while not densities or total < lo:
        d = _grid(rng.uniform(0.01, cap_f))
        if d < _MIN_DENSITY:
            d = _MIN_DENSITY
        if d > cap:
            d = cap
        if total + d > hi:
            if spec.rejection_sampling or (hi - total) < _MIN_DENSITY:
                rejects += 1
                if rejects > 100_000:
                    raise ModelError(f"cannot land in band [{lo}, {hi}] with cap {cap}")
                continue
            d = hi - total  # land exactly on the band's upper edge
        densities.append(d)
        total += d
    tasks = []
    for i, d in enumerate(densities, start=1):
        period = spec.period_pool[rng.randrange(len(spec.period_pool))]
        c = _regrid(d * period)
        if c < q(1, _GRID):
            c = q(1, _GRID)
        e_lo, e_hi = spec.e_range
        e = _grid(rng.uniform(float(e_lo), float(e_hi)))
        if e < e_lo:
            e = e_lo
        if e > e_hi:
            e = e_hi
        tasks.append(Task(id=i, wcet=c, deadline=period, period=period, energy_factor=e))
    return tasks


def generate_actual_times(tasks: Sequence[Task], horizon, seed: int, low_fraction=q(1, 10)) -> dict:
    """One actual execution time per job released in [0, horizon), uniform on
    [C * low_fraction, C] and quantized to the 1/1000 grid. Keyed by
    (task id, index); deterministic under the seed."""
    rng = random.Random(seed)
    out = {}
    for task in sorted(tasks, key=lambda t: t.id):
        lo = task.wcet * low_fraction
        span = task.wcet - lo
        lo_grid = q(-((-lo.numerator * _GRID) // lo.denominator), _GRID)  # grid-ceil
        for idx in range(1, _released_count(task.period, horizon) + 1):
            v = _regrid(_grid(rng.random()) * span + lo)
            if v < lo:
                v = lo_grid
            if v > task.wcet:
                v = task.wcet
            out[(task.id, idx)] = v
    return out


def _released_count(period, horizon) -> int:
    """Number of periodic releases 0, T, 2T, ... strictly before the horizon."""
    if horizon <= ZERO:
        return 0
    return int(math.ceil(horizon / period))  # k*T < H for k in 0..n-1


def hyperperiod(tasks: Sequence[Task]):
    """Least common multiple of the task periods (exact, supports rational
    periods: lcm of numerators over gcd of denominators)."""
    if not tasks:
        return ONE
    num = 1
    den = 0
    for t in tasks:
        num = math.lcm(num, int(t.period.numerator))
        den = math.gcd(den, int(t.period.denominator))
    return q(num, den)


def make_periodic_jobs(
    tasks: Sequence[Task],
    horizon,
    actual: Optional[Mapping] = None,
    offline_speed=ONE,
) -> list:
    """Materialize the periodic releases in [0, horizon) as Job objects.

    actual maps (task id, index) to the job's actual execution time; absent
    entries (or actual=None) default to the WCET. offline_speed is a single
    speed or a mapping from task id (this is the hook through which an
    offline speed-determination method feeds the simulator)."""
    jobs = []
    for task in sorted(tasks, key=lambda t: t.id):
        if isinstance(offline_speed, Mapping):
            s_off = offline_speed.get(task.id, ONE)
        else:
            s_off = offline_speed
        for idx in range(1, _released_count(task.period, horizon) + 1):
            exec_time = task.wcet
            if actual is not None:
                exec_time = actual.get((task.id, idx), task.wcet)
            jobs.append(
                Job(
                    task=task,
                    index=idx,
                    arrival=(idx - 1) * task.period,
                    actual_exec=exec_time,
                    offline_speed=s_off,
                )
            )
    return jobs


# --- file formats ---------------------------------------------------------


def taskset_to_json_obj(tasks: Sequence[Task]) -> list:
    return [
        {
            "id": t.id,
            "C": str(t.wcet),
            "D": str(t.deadline),
            "T": str(t.period),
            "e": str(t.energy_factor),
        }
        for t in tasks
    ]


def save_taskset(tasks: Sequence[Task], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(taskset_to_json_obj(tasks), fh, indent=2)
        fh.write("\n")


def load_taskset(path) -> list:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise ModelError(f"{path}: expected a top-level list of tasks")
    tasks = []
    for i, row in enumerate(data):
        try:
            tasks.append(
                Task(
                    id=int(row["id"]),
                    wcet=rat_from_json(row["C"]),
                    deadline=rat_from_json(row["D"]),
                    period=rat_from_json(row["T"]),
                    energy_factor=rat_from_json(row.get("e", 1)),
                )
            )
        except (KeyError, TypeError, ModelError) as ex:
            raise ModelError(f"{path}: task entry {i}: {ex}") from None
    return tasks


def save_actual_times(actual: Mapping, path) -> None:
    obj = {f"{tid}:{idx}": str(v) for (tid, idx), v in sorted(actual.items())}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def load_actual_times(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    out = {}
    for key, value in data.items():
        try:
            tid, idx = key.split(":")
            out[(int(tid), int(idx))] = rat_from_json(value)
        except (ValueError, TypeError) as ex:
            raise ModelError(f"{path}: entry {key!r}: {ex}") from None
    return out
