"""Run-time mirror of the offline schedule.

The queue holds one entry per job that is still active in the offline
schedule (the schedule in which every job runs its full WCET at its offline
speed), sorted by decreasing job priority. The first min(m, len) entries are
the jobs running offline, each pinned to a distinct processor; their
remaining work drains at their offline speeds. Everything else waits.

Processor assignment, which the offline schedule needs but the priority
order alone does not determine: a newly dispatched entry takes the processor
just freed by a completion, or the processor of the entry it displaces on
insert, or the lowest-index idle processor; simultaneous completions are
processed in priority order.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Optional

from ._rat import ZERO
from .model import Job, PriorityOrder

__all__ = ["AlphaEntry", "AlphaQueue", "OfflineEvent", "InsertReport", "MirrorError"]


class MirrorError(ValueError):
    pass


class AlphaEntry:
    """One offline-active job: its remaining offline work (at speed 1), its
    offline speed, and the processor it currently holds offline (None while
    waiting)."""

    __slots__ = ("job", "key", "prio", "rem_off", "s_off", "proc")

    def __init__(self, job: Job, prio, rem_off, s_off, proc=None):
        self.job = job
        self.key = job.key
        self.prio = prio
        self.rem_off = rem_off
        self.s_off = s_off
        self.proc = proc

    def __repr__(self):
        return f"AlphaEntry({self.job!r}, rem_off={self.rem_off}, proc={self.proc})"


@dataclass(frozen=True)
class OfflineEvent:
    time: object
    kind: str  # "completion" | "dispatch"
    job: Job
    proc: int


@dataclass(frozen=True)
class InsertReport:
    """What an insert did to the offline schedule: the dispatch it caused
    (if the job entered the running region) and the entry it displaced."""

    dispatched: Optional[OfflineEvent] = None
    preempted: Optional[Job] = None


class AlphaQueue:
    """Priority-sorted mirror of the offline schedule's active jobs.

    The queue is lazy: callers advance it explicitly, and advancing is only
    correct when no arrival falls strictly inside the advanced span (the
    engine segments time at every event, so this holds by construction).
    """

    def __init__(self, m: int, priority: PriorityOrder = PriorityOrder.EDF):
        if m < 1:
            raise MirrorError("need at least one processor")
        self.m = m
        self.priority = priority
        self.entries: list[AlphaEntry] = []
        self.last_update = ZERO
        self._by_key = {}
        self._free = list(range(1, m + 1))  # min-heap of idle processor ids

    def __len__(self):
        return len(self.entries)

    def head_entries(self):
        return self.entries[: min(self.m, len(self.entries))]

    def entry_for(self, job: Job) -> Optional[AlphaEntry]:
        return self._by_key.get(job.key)

    def rem_off(self, job: Job, t) -> object:
        if t != self.last_update:
            raise MirrorError(f"queue is at {self.last_update}, not {t}")
        entry = self._by_key.get(job.key)
        if entry is None:
            raise MirrorError(f"{job!r} is not active in the offline schedule")
        return entry.rem_off

    def insert(self, job: Job, t) -> InsertReport:
        """Insert a newly arrived job with its full WCET at its priority
        position. Happens once per arrival; re-insertion is an error."""
        if t != self.last_update:
            raise MirrorError(f"queue is at {self.last_update}, cannot insert at {t}")
        if job.key in self._by_key:
            raise MirrorError(f"duplicate insert of {job!r}")
        entry = AlphaEntry(job, self.priority.key(job), job.task.wcet, job.offline_speed)
        pos = self._position(entry.prio)
        was_len = len(self.entries)
        self.entries.insert(pos, entry)
        self._by_key[entry.key] = entry
        if pos >= self.m:
            return InsertReport()
        # The new entry runs offline immediately.
        if was_len >= self.m:
            displaced = self.entries[self.m]  # was the lowest-priority runner
            entry.proc = displaced.proc
            displaced.proc = None
            return InsertReport(
                dispatched=OfflineEvent(t, "dispatch", job, entry.proc),
                preempted=displaced.job,
            )
        entry.proc = heapq.heappop(self._free)
        return InsertReport(dispatched=OfflineEvent(t, "dispatch", job, entry.proc))

    def advance(self, t_new) -> list:
        """Drain the running entries up to t_new, removing entries whose
        remaining work reaches zero and promoting waiters to the freed
        processors, in chronological then priority order. Returns the
        completion/dispatch events with their exact timestamps."""
        if t_new < self.last_update:
            raise MirrorError(f"cannot advance backwards ({t_new} < {self.last_update})")
        events: list[OfflineEvent] = []
        while self.entries:
            now = self.last_update
            heads = self.head_entries()
            nxt = None
            for e in heads:
                cross = now + e.rem_off / e.s_off
                if nxt is None or cross < nxt:
                    nxt = cross
            step = nxt if nxt < t_new else t_new
            dt = step - now
            if dt > 0:
                for e in heads:
                    e.rem_off -= e.s_off * dt
            self.last_update = step
            if nxt > t_new:
                return events
            self._remove_zeroes(step, events)
        self.last_update = t_new
        return events

    def peek_next_zero(self):
        """Earliest future offline completion, or None when empty."""
        nxt = None
        now = self.last_update
        for e in self.head_entries():
            cross = now + e.rem_off / e.s_off
            if nxt is None or cross < nxt:
                nxt = cross
        return nxt

    def project(self, t, completed: Iterable = ()):
        """Run the offline schedule forward from t with no further arrivals
        until it drains, without touching the live queue.

        Returns (disp, nextdisp): disp maps each active job to the first
        instant at or after t it holds an offline processor (t for current
        holders); nextdisp maps each processor to the first instant strictly
        after t at which a job not yet completed in the actual schedule is
        dispatched to it. Processors with no such dispatch are absent
        (callers treat that as infinity).
        """
        if t != self.last_update:
            raise MirrorError(f"queue is at {self.last_update}, cannot project at {t}")
        if isinstance(completed, (set, frozenset)):
            probe = next(iter(completed), None)
            if probe is None or not isinstance(probe, Job):
                completed_keys = completed  # already a set of job keys
            else:
                completed_keys = {j.key for j in completed}
        else:
            completed_keys = {j.key if isinstance(j, Job) else j for j in completed}
        m = self.m
        sim = [[e.rem_off, e.s_off, e.proc, e.job] for e in self.entries]
        disp = {}
        nextdisp = {}
        for rem, s, proc, job in sim[: min(m, len(sim))]:
            disp[job] = t
        now = t
        while sim:
            n_heads = m if m < len(sim) else len(sim)
            nxt = None
            for h in sim[:n_heads]:
                cross = now + h[0] / h[1]
                if nxt is None or cross < nxt:
                    nxt = cross
            dt = nxt - now
            for h in sim[:n_heads]:
                h[0] -= h[1] * dt
            now = nxt
            i = 0
            while i < (m if m < len(sim) else len(sim)):
                if sim[i][0] == ZERO:
                    freed = sim[i][2]
                    del sim[i]
                    if len(sim) >= m:
                        promoted = sim[m - 1]
                        promoted[2] = freed
                        pjob = promoted[3]
                        if pjob not in disp:
                            disp[pjob] = now
                        if freed not in nextdisp and pjob.key not in completed_keys:
                            nextdisp[freed] = now
                    continue  # re-examine the same index
                i += 1
        return disp, nextdisp

    # internal helpers

    def _position(self, prio) -> int:
        lo, hi = 0, len(self.entries)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.entries[mid].prio < prio:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def _remove_zeroes(self, step, events):
        while True:
            zero = None
            for e in self.head_entries():
                if e.rem_off == ZERO:
                    zero = e
                    break
            if zero is None:
                return
            self.entries.remove(zero)
            del self._by_key[zero.key]
            events.append(OfflineEvent(step, "completion", zero.job, zero.proc))
            freed = zero.proc
            if len(self.entries) >= self.m:
                promoted = self.entries[self.m - 1]
                promoted.proc = freed
                events.append(OfflineEvent(step, "dispatch", promoted.job, freed))
            else:
                heapq.heappush(self._free, freed)

    def check_structure(self):
        """Assert the structural invariants; used by tests and the engine's
        invariant mode. Returns a list of human-readable problems."""
        problems = []
        for a, b in zip(self.entries, self.entries[1:]):
            if not a.prio < b.prio:
                problems.append(f"entries out of priority order at {a.key}/{b.key}")
        head = self.head_entries()
        procs = [e.proc for e in head]
        if any(p is None for p in procs):
            problems.append("running entry without a processor")
        if len(set(procs)) != len(procs):
            problems.append("duplicate processor assignment")
        for e in self.entries[len(head):]:
            if e.proc is not None:
                problems.append(f"waiting entry {e.key} holds a processor")
        for e in self.entries:
            if not e.rem_off > ZERO:
                problems.append(f"entry {e.key} has non-positive remaining work")
            if e.rem_off > e.job.task.wcet:
                problems.append(f"entry {e.key} exceeds its WCET")
        return problems
