"""Static domain types: tasks, jobs, the processor/power model, the speed
quantizer and the energy function.

Units are fixed as milliseconds and milliwatts, so energies come out in
microjoules. All values are exact rationals (see _rat).
"""

from __future__ import annotations

import json
from bisect import bisect_left
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional

from ._rat import ONE, ZERO, q, rat_from_json

__all__ = [
    "ModelError",
    "UnreachableSpeedError",
    "UnknownSpeedError",
    "ProcessorModel",
    "XSCALE",
    "Task",
    "Job",
    "PriorityOrder",
    "quantize_speed",
    "energy",
    "idle_energy",
    "wcet_at_speed",
    "density",
    "density_sum",
    "density_max",
    "load_processor_model",
    "parse_processor_model",
    "processor_model_to_json_obj",
]


class ModelError(ValueError):
    """A domain type's invariant is violated."""


class UnreachableSpeedError(ModelError):
    """Requested speed lies above the fastest table speed."""


class UnknownSpeedError(ModelError):
    """Speed is not a member of the processor's speed table."""


@dataclass(frozen=True)
class ProcessorModel:
    """Discrete speed table with per-speed run power and one idle power.

    Speeds are operating frequency divided by the maximal frequency, so the
    last (largest) speed is exactly 1. A processor at speed s completes
    s execution units per time unit. Frequencies are metadata only; all
    computation uses speeds.
    """

    name: str
    speeds: tuple
    power: Mapping
    idle_power: object
    frequencies: Optional[tuple] = None
    f_max: Optional[int] = None

    def __post_init__(self):
        if not self.speeds:
            raise ModelError("speed table is empty")
        for a, b in zip(self.speeds, self.speeds[1:]):
            if not a < b:
                raise ModelError("speeds must be strictly increasing")
        if self.speeds[0] <= ZERO:
            raise ModelError("speeds must be positive")
        if self.speeds[-1] != ONE:
            raise ModelError("largest speed must be exactly 1")
        missing = [s for s in self.speeds if s not in self.power]
        if missing:
            raise ModelError(f"no power entry for speeds {missing}")
        powers = [self.power[s] for s in self.speeds]
        for a, b in zip(powers, powers[1:]):
            if not a < b:
                raise ModelError("run power must be strictly increasing in speed")
        if self.idle_power > powers[0]:
            raise ModelError("idle power must not exceed the lowest run power")

    @property
    def s_min(self):
        return self.speeds[0]

    @property
    def s_max(self):
        return self.speeds[-1]

    def power_at(self, s):
        try:
            return self.power[s]
        except KeyError:
            raise UnknownSpeedError(f"speed {s} is not in the table of {self.name}") from None


def quantize_speed(s, model: ProcessorModel):
    """Translate an arbitrary computed speed into the smallest table speed
    that is at least as fast.

    A speed above 1 has no table entry at all and signals an infeasible
    offline configuration, hence the dedicated error.
    """
    if s < ZERO:
        raise ModelError(f"negative speed {s}")
    if s > model.s_max:
        raise UnreachableSpeedError(f"unreachable speed {s} > {model.s_max}")
    return model.speeds[bisect_left(model.speeds, s)]


def energy(e, duration, s, model: ProcessorModel):
    """Energy consumed by a task with consumption factor e executed for
    `duration` time units at table speed s:

        duration * (e * (P(s) - P_idle) + P_idle)

    Linear in the duration; e = 1 recovers the measured benchmark power.
    """
    if duration < ZERO:
        raise ModelError(f"negative duration {duration}")
    p = model.power_at(s)
    return duration * (e * (p - model.idle_power) + model.idle_power)


def idle_energy(duration, model: ProcessorModel):
    if duration < ZERO:
        raise ModelError(f"negative duration {duration}")
    return duration * model.idle_power


def wcet_at_speed(c, s):
    """Wall-clock time to complete c execution units at speed s."""
    if s <= ZERO:
        raise ModelError(f"speed must be positive, got {s}")
    return c / s


XSCALE = ProcessorModel(
    name="Intel XScale",
    speeds=(q("0.15"), q("0.4"), q("0.6"), q("0.8"), q(1)),
    power={
        q("0.15"): q(80),
        q("0.4"): q(170),
        q("0.6"): q(400),
        q("0.8"): q(900),
        q(1): q(1600),
    },
    idle_power=q(40),
    frequencies=(150, 400, 600, 800, 1000),
    f_max=1000,
)


@dataclass(frozen=True)
class Task:
    """Sporadic constrained-deadline task.

    wcet is the worst-case execution time in execution units at speed 1;
    deadline is relative; period is the minimal inter-arrival separation.
    energy_factor scales the dynamic part of the run power (1 recovers the
    measured benchmark).
    """

    id: int
    wcet: object
    deadline: object
    period: object
    energy_factor: object = ONE

    def __post_init__(self):
        if not ZERO < self.wcet:
            raise ModelError(f"task {self.id}: wcet must be positive")
        if not self.wcet <= self.deadline <= self.period:
            raise ModelError(f"task {self.id}: need 0 < C <= D <= T")
        if self.energy_factor < ZERO:
            raise ModelError(f"task {self.id}: energy factor must be >= 0")


def density(task: Task):
    """C/D, always <= 1 for a valid task."""
    return task.wcet / task.deadline


def density_sum(tasks: Iterable[Task]):
    total = ZERO
    for t in tasks:
        total += density(t)
    return total


def density_max(tasks: Iterable[Task]):
    return max(density(t) for t in tasks)


@dataclass(frozen=True, eq=False)
class Job:
    """One released instance of a task.

    Immutable identity plus release-time facts; the engine keeps the
    mutable run state (remaining work, current speed, processor) itself.
    actual_exec is the execution the job will really consume, in units at
    speed 1; offline_speed is fixed at arrival and never changes.

    eq=False keeps identity semantics (and cheap hashing) so jobs can key
    hot dictionaries; use .key for value-level identification.
    """

    task: Task
    index: int
    arrival: object
    actual_exec: object
    offline_speed: object = ONE
    absolute_deadline: object = field(init=False)

    def __post_init__(self):
        if self.arrival < ZERO:
            raise ModelError(f"job {self.task.id},{self.index}: negative arrival")
        if not ZERO < self.actual_exec <= self.task.wcet:
            raise ModelError(
                f"job {self.task.id},{self.index}: actual execution must be in (0, C]"
            )
        object.__setattr__(self, "absolute_deadline", self.arrival + self.task.deadline)

    @property
    def key(self):
        return (self.task.id, self.index)

    def __repr__(self):  # keep traces readable in failed assertions
        return f"J({self.task.id},{self.index})"


class PriorityOrder(Enum):
    """Fixed job-level priority orders: earliest absolute deadline first, or
    smallest relative deadline first. Ties break by task id then job index,
    which makes every comparison strict and runs deterministic."""

    EDF = "edf"
    DM = "dm"

    def key(self, job: Job):
        if self is PriorityOrder.EDF:
            return (job.absolute_deadline, job.task.id, job.index)
        return (job.task.deadline, job.task.id, job.index)

    @classmethod
    def parse(cls, text: str) -> "PriorityOrder":
        try:
            return cls(text.lower())
        except ValueError:
            raise ModelError(f"unknown priority order {text!r} (use edf or dm)") from None


def parse_processor_model(obj) -> ProcessorModel:
    """Build a ProcessorModel from the JSON schema
    {name, f_max, levels: [{freq, speed, power_mw}], idle_power_mw}.
    Speeds must be decimal strings so they parse to exact rationals.
    """
    try:
        levels = obj["levels"]
        if not isinstance(levels, list) or not levels:
            raise ModelError("levels must be a non-empty list")
        speeds = []
        power = {}
        freqs = []
        for lvl in levels:
            s = rat_from_json(lvl["speed"])
            speeds.append(s)
            power[s] = rat_from_json(lvl["power_mw"])
            freqs.append(lvl.get("freq"))
        return ProcessorModel(
            name=obj.get("name", "custom"),
            speeds=tuple(speeds),
            power=power,
            idle_power=rat_from_json(obj["idle_power_mw"]),
            frequencies=tuple(freqs) if all(f is not None for f in freqs) else None,
            f_max=obj.get("f_max"),
        )
    except KeyError as ex:
        raise ModelError(f"processor model file is missing field {ex}") from None
    except TypeError as ex:
        raise ModelError(f"processor model file: {ex}") from None


def load_processor_model(path) -> ProcessorModel:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_processor_model(json.load(fh))


def processor_model_to_json_obj(model: ProcessorModel) -> dict:
    levels = []
    for i, s in enumerate(model.speeds):
        lvl = {"speed": str(s), "power_mw": str(model.power[s])}
        if model.frequencies:
            lvl["freq"] = model.frequencies[i]
        levels.append(lvl)
    obj = {"name": model.name, "levels": levels, "idle_power_mw": str(model.idle_power)}
    if model.f_max is not None:
        obj["f_max"] = model.f_max
    return obj
