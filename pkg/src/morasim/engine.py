"""Event-driven dual-schedule simulator.

Runs the actual schedule under a policy (MAX, CONST, MORA), mirrors the
offline schedule through the alpha queue, applies the two speed rules,
accounts energy per processor, records traces, and optionally checks the
correctness invariants at every event instant.

Two remaining-work quantities coexist per job and both matter:

  * countdown  - the work the job will actually still execute; it drives
    completion and the reclaim decision math (Rule 2).
  * worst-case remaining - WCET minus executed units, i.e. what a scheduler
    can know online; it drives the dispatch-time speed (Rule 1), earliness,
    and the safety invariant (never above the offline remaining work).

Event processing at one timestamp is ordered: mirror advance, actual
completions, offline completions/dispatches (Rule 1 with preemption),
arrivals (mirror insert, speed set to the offline speed), then reclaim
(Rule 2) on processors that just went empty -- except that a processor
refilled by Rule 1 at the same instant gets only Rule 1.
"""

from __future__ import annotations

import warnings
from bisect import bisect_left, insort
from dataclasses import dataclass, replace
from heapq import heapify, heappop, heappush
from itertools import count
from typing import Optional, Sequence

from ._rat import INF, ONE, ZERO, decimal_str, q
from .mirror import AlphaQueue
from .model import (
    Job,
    ModelError,
    PriorityOrder,
    ProcessorModel,
    Task,
    UnknownSpeedError,
    UnreachableSpeedError,
    energy,
    quantize_speed,
)

__all__ = [
    "MaxPolicy",
    "ConstPolicy",
    "MoraPolicy",
    "parse_policy",
    "SimTrace",
    "EnergyReport",
    "SimResult",
    "Violation",
    "DeadlineMissError",
    "InvariantViolationError",
    "TraceError",
    "run",
    "account_energy",
    "rule1_speed",
    "reclaim_candidate",
    "earliness",
    "trace_to_json_obj",
    "report_to_json_obj",
    "write_trace_json",
    "write_trace_csv",
]


# --- policies ---------------------------------------------------------------


@dataclass(frozen=True)
class MaxPolicy:
    """Work-conserving global FJP dispatch, every job at speed 1."""

    name = "max"


@dataclass(frozen=True)
class ConstPolicy:
    """Work-conserving global FJP dispatch, every job at one table speed."""

    speed: object
    name = "const"


@dataclass(frozen=True)
class MoraPolicy:
    """Online slack reclamation against the offline-schedule mirror.

    Offline speeds ride on the jobs themselves (Job.offline_speed), which is
    the hook for any external offline speed-determination method.
    """

    name = "mora"


def parse_policy(text: str, const_speed=None):
    text = text.lower()
    if text == "max":
        return MaxPolicy()
    if text == "mora":
        return MoraPolicy()
    if text == "const":
        if const_speed is None:
            raise ModelError("const policy needs a speed")
        return ConstPolicy(speed=const_speed)
    raise ModelError(f"unknown policy {text!r} (use max, const or mora)")


# --- errors and reports -----------------------------------------------------


class DeadlineMissError(RuntimeError):
    """A job failed to complete by its absolute deadline. Signals an
    infeasible offline configuration or an engine bug."""

    def __init__(self, job: Job, time):
        self.job = job
        self.time = time
        super().__init__(f"job {job.key} missed its deadline at t={time}")


class InvariantViolationError(RuntimeError):
    pass


class TraceError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    invariant: str
    job: tuple
    time: object

    def __str__(self):
        return f"{self.invariant} for job {self.job} at t={self.time}"


@dataclass
class SimTrace:
    """Execution record: per-processor intervals for both schedules, the
    event stream, and per-job completion times. Interval rows are
    (proc, job, speed, start, end), sorted by processor then start."""

    m: int
    horizon: object
    policy: str
    priority: str
    intervals: list
    offline_intervals: list
    events: list
    completions: dict


@dataclass(frozen=True)
class EnergyReport:
    """Integrated energy in microjoules (milliwatts times milliseconds)."""

    per_proc: dict
    busy: object
    idle: object
    total: object
    normalized_pct: Optional[object] = None

    def normalized_against(self, reference_total) -> "EnergyReport":
        if reference_total <= ZERO:
            raise TraceError("reference energy must be positive")
        return replace(self, normalized_pct=q(100) * self.total / reference_total)


@dataclass(frozen=True)
class SimResult:
    trace: SimTrace
    report: EnergyReport
    violations: list


# --- the two speed rules, as pure functions ---------------------------------


def rule1_speed(rem, rem_off, s_off, model: ProcessorModel):
    """Dispatch-time speed: stretch the worst-case remaining work over the
    window the offline schedule still grants, then quantize up.

    rem above rem_off (or a vanished offline window) contradicts the safety
    invariant and cannot be honoured.
    """
    if rem_off <= ZERO:
        raise InvariantViolationError(
            f"offline remaining work is {rem_off} while {rem} units remain"
        )
    try:
        return quantize_speed(rem * s_off / rem_off, model)
    except UnreachableSpeedError as ex:
        raise InvariantViolationError(str(ex)) from None


def earliness(rem_off, rem):
    """Offline remaining work minus (worst-case) actual remaining work."""
    return rem_off - rem


def reclaim_candidate(countdown, rem_off, s_off, window, e, model: ProcessorModel):
    """Evaluate one waiting job for reclaiming an idle processor.

    window is the slack length L the job could use before anything is due on
    that processor. Returns (s_slow, s_base, saving): the speed granted the
    window, the speed it would get at its offline dispatch anyway, and the
    energy saved by taking the slow route over the whole remaining work.
    """
    s_base = quantize_speed(countdown * s_off / rem_off, model)
    s_slow = quantize_speed(countdown * s_off / (rem_off + window * s_off), model)
    saving = energy(e, countdown / s_base, s_base, model) - energy(
        e, countdown / s_slow, s_slow, model
    )
    return s_slow, s_base, saving


# --- job run state ----------------------------------------------------------


class _JobRun:
    __slots__ = (
        "job",
        "key",
        "prio",
        "countdown",
        "consumed",
        "speed",
        "proc",
        "last_rule",
        "finish",
        "completed",
        "arrived",
    )

    def __init__(self, job: Job, prio):
        self.job = job
        self.key = job.key
        self.prio = prio
        self.countdown = job.actual_exec
        self.consumed = ZERO
        self.speed = job.offline_speed
        self.proc = None
        self.last_rule = None
        self.finish = None
        self.completed = False
        self.arrived = False

    @property
    def worst_rem(self):
        return ZERO if self.completed else self.job.task.wcet - self.consumed


# --- shared driver plumbing --------------------------------------------------


class _DriverBase:
    def __init__(self, jobs, model, m, horizon, priority, check, record):
        self.model = model
        self.m = m
        self.horizon = horizon
        self.priority = priority
        self.check = check
        self.record = record
        self.states = {}
        order = []
        for job in jobs:
            st = _JobRun(job, priority.key(job))
            self.states[job] = st
            order.append(st)
        order.sort(key=lambda s: (s.job.arrival, s.prio))
        self.arrivals = order
        self._arr_i = 0
        self.running = {}
        self.completions = {}
        self.completed_keys = set()
        self.events = []
        self.violations = []
        self._dl_heap = []
        self._seq = count()
        self._open = {}
        self._done = {}
        self._open_off = {}
        self._done_off = {}
        self._idle = set(range(1, m + 1)) if record else set()
        self._touched = set()
        if record:
            for p in range(1, m + 1):
                self._event(ZERO, "idle-start", proc=p)

    # events -----------------------------------------------------------------

    def _event(self, t, kind, **payload):
        if self.record:
            payload["t"] = t
            payload["type"] = kind
            self.events.append(payload)

    # interval recording -------------------------------------------------------

    def _open_lane(self, opens, dones, proc, job, speed, t):
        self._touched.add(proc)
        done = dones.get(proc)
        if done:
            last = done[-1]
            if last[3] == t and last[0] is job and last[1] == speed:
                opens[proc] = [job, speed, last[2]]
                done.pop()
                return
        opens[proc] = [job, speed, t]

    def _close_lane(self, opens, dones, proc, t):
        self._touched.add(proc)
        slot = opens.pop(proc, None)
        if slot is None or slot[2] == t:
            return
        dones.setdefault(proc, []).append((slot[0], slot[1], slot[2], t))

    def _open_actual(self, proc, st, t):
        self._open_lane(self._open, self._done, proc, st.job, st.speed, t)

    def _close_actual(self, proc, t):
        self._close_lane(self._open, self._done, proc, t)

    # main loop ----------------------------------------------------------------

    def execute(self, policy_name) -> SimTrace:
        t = ZERO
        while True:
            t_next = self.horizon
            if self._arr_i < len(self.arrivals):
                a = self.arrivals[self._arr_i].job.arrival
                if a < t_next:
                    t_next = a
            for st in self.running.values():
                if st.finish < t_next:
                    t_next = st.finish
            extra = self._mirror_next()
            if extra is not None and extra < t_next:
                t_next = extra
            dl = self._peek_deadline()
            if dl is not None and dl < t_next:
                t_next = dl
            dt = t_next - t
            if dt > ZERO:
                for st in self.running.values():
                    ran = st.speed * dt
                    st.countdown -= ran
                    st.consumed += ran
            off_events = self._mirror_advance(t_next)
            t = t_next
            self._touched = set()
            self._process(t, off_events)
            self._deadline_checks(t)
            if self.check != "off":
                self._check_invariants(t)
            self._sync_idle(t)
            if t == self.horizon:
                break
        for proc in list(self._open):
            self._close_actual(proc, self.horizon)
        for proc in list(self._open_off):
            self._close_lane(self._open_off, self._done_off, proc, self.horizon)
        return SimTrace(
            m=self.m,
            horizon=self.horizon,
            policy=policy_name,
            priority=self.priority.value,
            intervals=self._flatten(self._done),
            offline_intervals=self._flatten(self._done_off),
            events=self.events,
            completions=dict(self.completions),
        )

    @staticmethod
    def _flatten(dones) -> list:
        rows = []
        for proc in sorted(dones):
            for job, speed, start, end in dones[proc]:
                rows.append((proc, job, speed, start, end))
        return rows

    def _mirror_next(self):
        return None

    def _mirror_advance(self, t_new):
        return ()

    def _peek_deadline(self):
        h = self._dl_heap
        while h and h[0][2].completed:
            heappop(h)
        return h[0][0] if h else None

    def _deadline_checks(self, t):
        h = self._dl_heap
        while h and h[0][0] <= t:
            deadline, _, st = heappop(h)
            if not st.completed:
                raise DeadlineMissError(st.job, deadline)
            self._event(deadline, "deadline-check", task=st.key[0], job=st.key[1], ok=True)

    def _complete_running(self, t):
        """Remove jobs whose countdown just hit zero; returns freed procs."""
        freed = set()
        done = [st for st in self.running.values() if st.countdown == ZERO]
        done.sort(key=lambda s: s.prio)
        for st in done:
            proc = st.proc
            self._close_actual(proc, t)
            del self.running[proc]
            st.proc = None
            st.finish = None
            st.completed = True
            self.completions[st.key] = t
            self.completed_keys.add(st.key)
            freed.add(proc)
            if self.check != "off" and st.consumed != st.job.actual_exec:
                self._violate("progress_conservation", st.key, t)
            self._event(t, "actual-completion", task=st.key[0], job=st.key[1], proc=proc)
            self._on_completed(st)
        return freed

    def _on_completed(self, st):
        pass

    def _arrive_batch(self, t):
        batch = []
        while self._arr_i < len(self.arrivals) and self.arrivals[self._arr_i].job.arrival == t:
            st = self.arrivals[self._arr_i]
            self._arr_i += 1
            st.arrived = True
            heappush(self._dl_heap, (st.job.absolute_deadline, next(self._seq), st))
            self._event(t, "arrival", task=st.key[0], job=st.key[1])
            batch.append(st)
        return batch

    def _place(self, proc, st, speed, t, rule):
        st.speed = speed
        st.proc = proc
        st.last_rule = rule
        st.finish = t + st.countdown / speed
        self.running[proc] = st
        self._open_actual(proc, st, t)

    def _violate(self, name, job_key, t, detail=""):
        v = Violation(name, job_key, t)
        self.violations.append(v)
        if self.check == "raise":
            raise InvariantViolationError(str(v) + (f" ({detail})" if detail else ""))

    def _sync_idle(self, t):
        if not self.record:
            return
        for proc in sorted(self._touched):
            busy = proc in self.running
            if busy and proc in self._idle:
                self._idle.discard(proc)
                self._event(t, "idle-end", proc=proc)
            elif not busy and proc not in self._idle:
                self._idle.add(proc)
                self._event(t, "idle-start", proc=proc)

    def _check_invariants(self, t):
        pass


# --- work-conserving driver (MAX / CONST) ------------------------------------


class _WcDriver(_DriverBase):
    """Highest-priority min(m, active) jobs run, all at one constant speed;
    a freed processor goes to the highest-priority waiter. The offline
    mirror is not consulted."""

    def __init__(self, jobs, model, m, horizon, priority, check, record, speed):
        super().__init__(jobs, model, m, horizon, priority, check, record)
        self.const_speed = speed
        self.active = []  # sorted (prio, st), arrived and incomplete
        self._free = list(range(1, m + 1))
        heapify(self._free)

    def _on_completed(self, st):
        i = bisect_left(self.active, st.prio, key=lambda pair: pair[0])
        del self.active[i]

    def _process(self, t, _off_events):
        freed = self._complete_running(t)
        for p in freed:
            heappush(self._free, p)
        for st in self._arrive_batch(t):
            insort(self.active, (st.prio, st))
        want = self.active[: min(self.m, len(self.active))]
        want_set = {id(st) for _, st in want}
        for proc in sorted(self.running):
            st = self.running[proc]
            if id(st) not in want_set:
                self._close_actual(proc, t)
                del self.running[proc]
                st.proc = None
                st.finish = None
                heappush(self._free, proc)
        for _, st in want:
            if st.proc is None:
                self._place(heappop(self._free), st, self.const_speed, t, rule=None)


# --- reclaiming driver (MORA) -------------------------------------------------


class _MoraDriver(_DriverBase):
    def __init__(self, jobs, model, m, horizon, priority, check, record):
        super().__init__(jobs, model, m, horizon, priority, check, record)
        self.alpha = AlphaQueue(m, priority)
        self.waiting = []  # sorted (prio, st), actual-waiting jobs
        self._proj = None

    def _mirror_next(self):
        return self.alpha.peek_next_zero()

    def _mirror_advance(self, t_new):
        return self.alpha.advance(t_new)

    def _process(self, t, off_events):
        self._proj = None
        freed = self._complete_running(t)
        recheck = set()  # procs to sweep although not freed by a completion

        for ev in off_events:
            if ev.kind == "completion":
                self._close_lane(self._open_off, self._done_off, ev.proc, t)
                self._event(t, "offline-completion", task=ev.job.task.id, job=ev.job.index, proc=ev.proc)
            else:
                self._open_lane(self._open_off, self._done_off, ev.proc, ev.job, ev.job.offline_speed, t)
                self._event(t, "offline-dispatch", task=ev.job.task.id, job=ev.job.index, proc=ev.proc)
                self._rule1(ev.job, ev.proc, t, freed, recheck)

        for st in self._arrive_batch(t):
            report = self.alpha.insert(st.job, t)
            if report.dispatched is None:
                insort(self.waiting, (st.prio, st))
                continue
            proc = report.dispatched.proc
            if report.preempted is not None:
                self._close_lane(self._open_off, self._done_off, proc, t)
            self._open_lane(self._open_off, self._done_off, proc, st.job, st.job.offline_speed, t)
            self._event(t, "offline-dispatch", task=st.key[0], job=st.key[1], proc=proc)
            self._rule1(st.job, proc, t, freed, recheck)

        for proc in sorted(freed | recheck):
            if proc not in self.running:
                self._rule2(proc, t)

    # Rule 1: follow every offline dispatch in the actual schedule.

    def _rule1(self, job, proc, t, freed, recheck):
        st = self.states[job]
        if st.completed:
            # Nothing to dispatch. The processor's reclaim window just
            # changed though, so Rule 2 gets another look at it, with a
            # preempted reclaim job (if any) back among the candidates.
            occ = self.running.get(proc)
            if occ is not None and occ.last_rule == 2:
                self._evict(proc, occ, t)
                recheck.add(proc)
            elif occ is None:
                recheck.add(proc)
            return
        entry = self.alpha.entry_for(job)
        if entry is None:
            raise InvariantViolationError(
                f"offline dispatch of {job!r} at t={t} without a mirror entry"
            )
        rem = st.worst_rem
        speed = rule1_speed(rem, entry.rem_off, entry.s_off, self.model)
        old_speed = st.speed
        preempted = None
        if st.proc == proc:
            if st.speed != speed:
                self._close_actual(proc, t)
                st.speed = speed
                self._open_actual(proc, st, t)
            st.last_rule = 1
            st.finish = t + st.countdown / speed
        else:
            if st.proc is not None:  # running elsewhere under Rule 2: migrate
                self._close_actual(st.proc, t)
                del self.running[st.proc]
                freed.add(st.proc)
                st.proc = None
            else:
                self._waiting_remove(st)
            occ = self.running.get(proc)
            if occ is not None:
                self._evict(proc, occ, t)
                preempted = occ.key
            self._place(proc, st, speed, t, rule=1)
        self._event(
            t,
            "rule1-applied",
            task=st.key[0],
            job=st.key[1],
            proc=proc,
            old_speed=old_speed,
            new_speed=speed,
            rem=rem,
            rem_off=entry.rem_off,
            preempted=preempted,
        )

    def _evict(self, proc, occ, t):
        self._close_actual(proc, t)
        del self.running[proc]
        occ.proc = None
        occ.finish = None
        insort(self.waiting, (occ.prio, occ))

    def _waiting_remove(self, st):
        i = bisect_left(self.waiting, st.prio, key=lambda pair: pair[0])
        if i < len(self.waiting) and self.waiting[i][1] is st:
            del self.waiting[i]

    # Rule 2: when a processor goes idle, hand it to the waiting job whose
    # slowdown over the reclaimed window saves the most energy.

    def _rule2(self, proc, t):
        if not self.waiting:
            self._event(t, "rule2-applied", proc=proc, decision="idle", candidates=[])
            return
        if self._proj is None:
            self._proj = self.alpha.project(t, self.completed_keys)
        disp, nextdisp = self._proj
        nd = nextdisp.get(proc, INF)
        cands = []
        best = first = None
        for _, st in self.waiting:
            entry = self.alpha.entry_for(st.job)
            if entry is None:
                continue  # no offline window left to reason about
            dj = disp.get(st.job, INF)
            bound = dj if dj < nd else nd
            if bound == INF:
                continue  # reclaim window cannot be bounded
            window = bound - t
            try:
                s_slow, s_base, saving = reclaim_candidate(
                    st.countdown, entry.rem_off, entry.s_off, window,
                    st.job.task.energy_factor, self.model,
                )
            except UnreachableSpeedError as ex:
                # only reachable when the safety invariant is already broken
                raise InvariantViolationError(str(ex)) from None
            if self.record:
                cands.append(
                    {
                        "task": st.key[0],
                        "job": st.key[1],
                        "L": window,
                        "s_slow": s_slow,
                        "s_base": s_base,
                        "saving": saving,
                    }
                )
            if first is None:
                first = (st, s_slow)
            if best is None or saving > best[2]:
                best = (st, s_slow, saving)
        if best is None:
            self._event(t, "rule2-applied", proc=proc, decision="idle", candidates=cands)
            return
        if best[2] > ZERO:
            chosen, speed, _ = best
            fallback = False
        else:
            chosen, speed = first  # highest priority, to grow future slack
            fallback = True
        self._waiting_remove(chosen)
        self._place(proc, chosen, speed, t, rule=2)
        self._event(
            t,
            "rule2-applied",
            proc=proc,
            decision="fallback" if fallback else "saving",
            task=chosen.key[0],
            job=chosen.key[1],
            speed=speed,
            candidates=cands,
        )

    # correctness invariants, checked after all processing at an instant

    def _check_invariants(self, t):
        for entry in self.alpha.head_entries():
            st = self.states.get(entry.job)
            if st is None or not st.arrived or st.completed:
                continue
            if st.proc is None:
                self._violate("lemma1_offline_running_actual_waiting", entry.key, t)
            if st.last_rule == 2:
                self._violate("lemma2_rule2_speed_while_offline_running", entry.key, t)
        for st in self.running.values():
            self._check_rem(st, t)
        for _, st in self.waiting:
            self._check_rem(st, t)
        problems = self.alpha.check_structure()
        for p in problems:
            self._violate("mirror_structure", (0, 0), t, p)

    def _check_rem(self, st, t):
        entry = self.alpha.entry_for(st.job)
        rem_off = entry.rem_off if entry is not None else ZERO
        if st.worst_rem > rem_off:
            self._violate("rem_exceeds_rem_off", st.key, t)


# --- entry point --------------------------------------------------------------


def _validate_jobs(tasks, jobs, horizon):
    by_id = {t.id: t for t in tasks}
    if len(by_id) != len(tasks):
        raise ModelError("duplicate task ids")
    per_task = {}
    seen = set()
    for job in jobs:
        if by_id.get(job.task.id) != job.task:
            raise ModelError(f"job {job.key} references a task outside the task set")
        if job.key in seen:
            raise ModelError(f"duplicate job {job.key}")
        seen.add(job.key)
        if job.arrival >= horizon:
            raise ModelError(f"job {job.key} arrives at {job.arrival}, beyond the horizon")
        per_task.setdefault(job.task.id, []).append(job)
    for tid, js in per_task.items():
        js.sort(key=lambda j: j.index)
        for a, b in zip(js, js[1:]):
            if b.index <= a.index:
                raise ModelError(f"task {tid}: job indices must increase")
            if b.arrival - a.arrival < a.task.period:
                raise ModelError(
                    f"task {tid}: jobs {a.index} and {b.index} violate the minimal separation"
                )


def run(
    tasks: Sequence[Task],
    jobs: Sequence[Job],
    policy,
    model: ProcessorModel,
    m: int,
    horizon,
    *,
    priority: PriorityOrder = PriorityOrder.EDF,
    check: str = "off",
    record_events: bool = True,
    reference_energy=None,
) -> SimResult:
    """Simulate [0, horizon] deterministically and account energy.

    check: "off" | "collect" | "raise" - run-time invariant checking at every
    event instant. Deadline misses always raise DeadlineMissError.
    reference_energy: total energy of a reference run over the same jobs
    (normally the MAX policy), producing a normalized percentage.
    """
    if m < 1:
        raise ModelError("need at least one processor")
    horizon = q(horizon)
    if horizon <= ZERO:
        raise ModelError("horizon must be positive")
    if check not in ("off", "collect", "raise"):
        raise ModelError(f"unknown check mode {check!r}")
    _validate_jobs(tasks, jobs, horizon)
    if not jobs:
        warnings.warn("horizon covers no job arrival", stacklevel=2)

    if isinstance(policy, MaxPolicy):
        driver = _WcDriver(jobs, model, m, horizon, priority, check, record_events, ONE)
    elif isinstance(policy, ConstPolicy):
        if policy.speed not in model.power:
            raise UnknownSpeedError(f"const speed {policy.speed} is not in the table")
        driver = _WcDriver(jobs, model, m, horizon, priority, check, record_events, policy.speed)
    elif isinstance(policy, MoraPolicy):
        for job in jobs:
            if job.offline_speed not in model.power:
                raise UnknownSpeedError(
                    f"offline speed {job.offline_speed} of job {job.key} is not in the table"
                )
        driver = _MoraDriver(jobs, model, m, horizon, priority, check, record_events)
    else:
        raise ModelError(f"unknown policy object {policy!r}")

    trace = driver.execute(policy.name)
    report = account_energy(trace, model)
    if reference_energy is not None:
        report = report.normalized_against(reference_energy)
    return SimResult(trace=trace, report=report, violations=driver.violations)


# --- energy accounting ---------------------------------------------------------


def account_energy(trace: SimTrace, model: ProcessorModel) -> EnergyReport:
    """Integrate run energy over the trace intervals and idle energy over the
    gaps, per processor, exactly."""
    busy_e = {}
    busy_t = {}
    last_end = {}
    for proc, job, speed, start, end in trace.intervals:
        if start < ZERO or end > trace.horizon or end < start:
            raise TraceError(f"interval [{start}, {end}] outside [0, {trace.horizon}]")
        prev = last_end.get(proc, ZERO)
        if start < prev:
            raise TraceError(f"overlapping intervals on processor {proc} at {start}")
        last_end[proc] = end
        dur = end - start
        busy_e[proc] = busy_e.get(proc, ZERO) + energy(
            job.task.energy_factor, dur, speed, model
        )
        busy_t[proc] = busy_t.get(proc, ZERO) + dur
    per_proc = {}
    total_busy = ZERO
    total_idle = ZERO
    for proc in range(1, trace.m + 1):
        be = busy_e.get(proc, ZERO)
        ie = (trace.horizon - busy_t.get(proc, ZERO)) * model.idle_power
        per_proc[proc] = {"busy": be, "idle": ie, "total": be + ie}
        total_busy += be
        total_idle += ie
    return EnergyReport(
        per_proc=per_proc, busy=total_busy, idle=total_idle, total=total_busy + total_idle
    )


# --- serialization ---------------------------------------------------------------


def _jsonify(value):
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        return "inf" if value == INF else repr(value)
    if isinstance(value, dict):
        return {k: _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    return str(value)  # exact rationals


def _intervals_obj(rows):
    return [
        {
            "proc": proc,
            "task": job.task.id,
            "job": job.index,
            "speed": str(speed),
            "start": str(start),
            "end": str(end),
        }
        for proc, job, speed, start, end in rows
    ]


def trace_to_json_obj(trace: SimTrace) -> dict:
    return {
        "m": trace.m,
        "horizon": str(trace.horizon),
        "policy": trace.policy,
        "priority": trace.priority,
        "intervals": _intervals_obj(trace.intervals),
        "offline_intervals": _intervals_obj(trace.offline_intervals),
        "events": [_jsonify(ev) for ev in trace.events],
        "completions": {f"{tid}:{idx}": str(t) for (tid, idx), t in sorted(trace.completions.items())},
    }


def write_trace_json(trace: SimTrace, path) -> None:
    import json

    with open(path, "w", encoding="utf-8") as fh:
        json.dump(trace_to_json_obj(trace), fh, indent=2)
        fh.write("\n")


def write_trace_csv(trace: SimTrace, path) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["proc", "task", "job", "speed_num", "speed_den", "start", "end"])
        for proc, job, speed, start, end in trace.intervals:
            w.writerow(
                [proc, job.task.id, job.index, speed.numerator, speed.denominator, str(start), str(end)]
            )


def report_to_json_obj(report: EnergyReport) -> dict:
    def both(v):
        return {"exact": str(v), "decimal": decimal_str(v)}

    obj = {
        "total_uj": both(report.total),
        "busy_uj": both(report.busy),
        "idle_uj": both(report.idle),
        "per_proc": {
            str(p): {k: both(v) for k, v in parts.items()} for p, parts in report.per_proc.items()
        },
    }
    obj["normalized_pct"] = both(report.normalized_pct) if report.normalized_pct is not None else None
    return obj
