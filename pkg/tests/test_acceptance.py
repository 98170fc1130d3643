"""Acceptance criteria, one test per criterion, each printing a PASS line
(run with -s to see them live). The sweep in criterion 5 dominates the
runtime; expect the whole module to take on the order of fifteen minutes on
one core."""

import statistics

from morasim import (
    XSCALE,
    AlphaQueue,
    MoraPolicy,
    PriorityOrder,
    energy,
    q,
    run,
)
from morasim.cli import ExperimentConfig, run_experiment, validation_instance
from morasim.workload import make_periodic_jobs

from conftest import fig_jobs, fig_tasks
from oracle_quantum import QuantumSim
from test_oracle import grid_aligned, grid_instance


def _passed(name):
    print(f"ACCEPTANCE {name}: PASS")


def test_acceptance_1_worked_example_exactness():
    tasks = fig_tasks()
    jobs = fig_jobs(tasks)

    # mirror queries return the published values
    queue = AlphaQueue(m=2, priority=PriorityOrder.EDF)
    for job in jobs:
        queue.insert(job, q(0))
    disp, _ = queue.project(q(0))
    assert disp[jobs[3]] == 6  # first offline dispatch of tau4,1
    assert disp[jobs[4]] == 8  # first offline dispatch of tau5,1
    queue.advance(q(2))
    _, nextdisp = queue.project(q(2), {jobs[1].key})
    assert nextdisp[2] == 6
    queue.advance(q(3))
    assert queue.rem_off(jobs[0], q(3)) == 3
    _, nextdisp = queue.project(q(3), {jobs[0].key, jobs[1].key})
    assert nextdisp[1] == 6

    # the run itself: reclaim fires at t=2 on P2 and picks tau5,1 at 0.6
    res = run(tasks, jobs, MoraPolicy(), XSCALE, m=2, horizon=q(20),
              priority=PriorityOrder.EDF, check="raise")
    rule2 = [e for e in res.trace.events
             if e["type"] == "rule2-applied" and e["t"] == 2]
    assert len(rule2) == 1
    assert rule2[0]["proc"] == 2
    assert (rule2[0]["task"], rule2[0]["job"]) == (5, 1)
    assert rule2[0]["speed"] == q("0.6")

    tau5 = [(p, s, a, b) for p, j, s, a, b in res.trace.intervals if j.task.id == 5]
    assert tau5 == [(2, q("0.6"), q(2), q(6)), (2, q("0.6"), q(8), q(14))]
    tau4 = [(a, b) for p, j, s, a, b in res.trace.intervals if j.task.id == 4]
    assert (q(6), q(8)) in tau4

    # every deadline met
    for job in jobs:
        assert res.trace.completions[job.key] <= job.absolute_deadline
    _passed("worked-example exactness")


def test_acceptance_2_invariant_suite_500_instances():
    misses = 0
    violations = []
    for i in range(500):
        tasks, jobs, m, horizon = validation_instance(f"acc2:{i}", n_max=8, m_max=4)
        res = run(tasks, jobs, MoraPolicy(), XSCALE, m=m, horizon=horizon,
                  priority=PriorityOrder.EDF, check="collect", record_events=False)
        violations.extend(res.violations)
        for job in jobs:
            done = res.trace.completions.get(job.key)
            if done is None:
                assert job.absolute_deadline > horizon, f"unfinished {job.key} seed {i}"
            else:
                assert done <= job.absolute_deadline
    assert misses == 0
    assert violations == []
    _passed("correctness invariant suite (500 instances, 0 violations)")


def test_acceptance_3_oracle_equivalence_100_instances():
    kept = 0
    seed = 0
    while kept < 100:
        seed += 1
        assert seed < 3000, f"only {kept} grid-aligned instances in 3000 draws"
        inst = grid_instance(seed)
        if inst is None:
            continue
        tasks, jobs, m, horizon = inst
        res = run(tasks, jobs, MoraPolicy(), XSCALE, m=m, horizon=horizon, check="raise")
        if not grid_aligned(res):
            continue
        sim = QuantumSim(tasks, jobs, XSCALE, m, horizon, quantum=q(1, 100)).run()
        assert sim.completions == res.trace.completions, f"seed {seed}"
        got = [(p, j.key, s, a, b) for p, j, s, a, b in sim.intervals]
        want = [(p, j.key, s, a, b) for p, j, s, a, b in res.trace.intervals]
        assert got == want, f"seed {seed}"
        assert sim.total_energy == res.report.total, f"seed {seed}"
        kept += 1
    _passed("oracle equivalence (100 fixed-quantum matches, exact)")


def test_acceptance_4_energy_model_unit_values():
    expected = {
        q("0.15"): q(80),
        q("0.4"): q(170),
        q("0.6"): q(400),
        q("0.8"): q(900),
        q(1): q(1600),
    }
    for speed, power in expected.items():
        assert energy(q(1), q(1), speed, XSCALE) == power
    _passed("energy-model unit values (all five table speeds)")


def test_acceptance_5_trend_reproduction(tmp_path):
    config = ExperimentConfig(
        dmax_values=("0.1", "0.4", "0.7", "1.0"),
        sets_per_band=20,
        band_max=q(3),
        band_width=q("0.05"),
        hyperperiods=5,
        priority=PriorityOrder.EDF,
        seed="acceptance",
        offline_speed=q(1),
        model_arg="xscale",
    )
    aggregates, failures = run_experiment(config, tmp_path / "sweep", svg=True, workers=1)
    means_pct = []
    means_ratio = []
    for d in config.dmax_values:
        pct = aggregates[d]["pct"]
        assert len(pct) >= 1000, f"too many failed sets at cap {d}"
        means_pct.append(statistics.mean(pct))
        means_ratio.append(statistics.mean(aggregates[d]["ratio"]))
    # (a) processors per task grow with the density cap
    assert all(a < b for a, b in zip(means_ratio, means_ratio[1:])), means_ratio
    # (b) reclaiming saves less as m/n grows
    assert all(a < b for a, b in zip(means_pct, means_pct[1:])), means_pct
    # (c) at cap 0.1 the mean saving is at least 20 percent
    assert means_pct[0] <= 80.0, means_pct
    print(f"  mean consumption vs max: {[round(v, 2) for v in means_pct]}")
    print(f"  mean m/n: {[round(v, 3) for v in means_ratio]}")
    print(f"  skipped sets: {len(failures)}")
    _passed("trend reproduction (m/n and consumption rise with the density cap; "
            f"saving at 0.1 = {100 - means_pct[0]:.1f}% >= 20%)")


def test_acceptance_6_max_degenerate_equivalence():
    checked = 0
    i = 0
    while checked < 50:
        tasks, _, m, horizon = validation_instance(f"acc6:{i}", n_max=8, m_max=4)
        i += 1
        jobs = make_periodic_jobs(tasks, horizon)  # actual = WCET everywhere
        res = run(tasks, jobs, MoraPolicy(), XSCALE, m=m, horizon=horizon,
                  priority=PriorityOrder.EDF, check="raise")
        actual = [(p, j.key, s, a, b) for p, j, s, a, b in res.trace.intervals]
        offline = [(p, j.key, s, a, b) for p, j, s, a, b in res.trace.offline_intervals]
        assert actual == offline, f"instance acc6:{i - 1}"
        checked += 1
    _passed("degenerate equivalence (actual schedule == offline schedule, 50 instances)")
