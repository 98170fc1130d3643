import pytest

from morasim import (
    GenSpec,
    ModelError,
    Task,
    density,
    density_sum,
    generate_actual_times,
    generate_taskset,
    hyperperiod,
    load_actual_times,
    load_taskset,
    make_periodic_jobs,
    q,
    save_actual_times,
    save_taskset,
)
from morasim.workload import DEFAULT_PERIOD_POOL


def test_band_landing_and_caps():
    for seed in range(40):
        spec = GenSpec(band=(q("0.95"), q("1.0")), density_cap=q("0.1"), seed=seed)
        tasks = generate_taskset(spec)
        total = density_sum(tasks)
        assert q("0.95") <= total <= q("1.0")
        assert len(tasks) >= 10  # cap 0.1 forces at least ten tasks
        for t in tasks:
            assert q("0.01") <= density(t) <= q("0.1")
            assert t.wcet <= t.deadline == t.period
            assert t.period in DEFAULT_PERIOD_POOL
            assert q("0.8") <= t.energy_factor <= q("1.2")


def test_lowest_band_gives_single_task():
    for seed in range(10):
        tasks = generate_taskset(GenSpec(band=(q(0), q("0.05")), density_cap=q("0.5"), seed=seed))
        assert len(tasks) == 1
        assert density(tasks[0]) <= q("0.05")


def test_generation_is_deterministic():
    spec = GenSpec(band=(q("1.0"), q("1.05")), density_cap=q("0.3"), seed=42)
    a = generate_taskset(spec)
    b = generate_taskset(spec)
    assert [(t.id, t.wcet, t.period, t.energy_factor) for t in a] == [
        (t.id, t.wcet, t.period, t.energy_factor) for t in b
    ]


def test_infeasible_band_rejected():
    with pytest.raises(ModelError):
        GenSpec(band=(q(0), q("0.005")), density_cap=q("0.5"), seed=0)


def test_actual_times_bounds_and_determinism():
    tasks = generate_taskset(GenSpec(band=(q("0.5"), q("0.55")), density_cap=q("0.2"), seed=3))
    horizon = hyperperiod(tasks)
    a = generate_actual_times(tasks, horizon, seed=9)
    b = generate_actual_times(tasks, horizon, seed=9)
    assert a == b
    by_id = {t.id: t for t in tasks}
    assert a
    for (tid, idx), v in a.items():
        c = by_id[tid].wcet
        assert c / 10 <= v <= c
        assert v.denominator <= 1000


def test_actual_times_range_for_known_wcet():
    t = Task(id=1, wcet=q(6), deadline=q(10), period=q(10))
    values = generate_actual_times([t], q(200), seed=1).values()
    assert values
    assert all(q("0.6") <= v <= q(6) for v in values)


def test_actual_times_mean_ratio():
    # uniform on [C/10, C] has mean 0.55 C
    t = Task(id=1, wcet=q(10), deadline=q(10), period=q(10))
    values = generate_actual_times([t], q(50000), seed=7)
    mean = sum(values.values()) / (len(values) * t.wcet)
    assert abs(float(mean) - 0.55) < 0.02


def test_hyperperiod_values():
    def mk(periods):
        return [Task(id=i, wcet=q(1), deadline=q(p), period=q(p)) for i, p in enumerate(periods, 1)]

    assert hyperperiod(mk([30, 35, 40, 45, 50])) == 12600
    assert hyperperiod(mk([10])) == 10
    assert hyperperiod(mk([8, 4, 2])) == 8


def test_hyperperiod_bounded_by_pool_lcm():
    pool_lcm = hyperperiod(
        [Task(id=i, wcet=q(1), deadline=p, period=p) for i, p in enumerate(DEFAULT_PERIOD_POOL, 1)]
    )
    assert pool_lcm == 400
    for seed in range(20):
        tasks = generate_taskset(GenSpec(band=(q("1.5"), q("1.55")), density_cap=q("0.4"), seed=seed))
        assert pool_lcm % hyperperiod(tasks) == 0


def test_make_periodic_jobs():
    t1 = Task(id=1, wcet=q(2), deadline=q(10), period=q(10))
    t2 = Task(id=2, wcet=q(3), deadline=q(20), period=q(20))
    jobs = make_periodic_jobs([t1, t2], q(40), actual={(1, 2): q(1)})
    keys = [(j.task.id, j.index, j.arrival) for j in jobs]
    assert keys == [
        (1, 1, q(0)),
        (1, 2, q(10)),
        (1, 3, q(20)),
        (1, 4, q(30)),
        (2, 1, q(0)),
        (2, 2, q(20)),
    ]
    assert jobs[1].actual_exec == 1  # explicit actual time
    assert jobs[0].actual_exec == 2  # defaults to the WCET
    jobs_h = make_periodic_jobs([t1], q(30))  # release at the horizon excluded
    assert [(j.index) for j in jobs_h] == [1, 2, 3]


def test_offline_speed_map():
    t1 = Task(id=1, wcet=q(2), deadline=q(10), period=q(10))
    t2 = Task(id=2, wcet=q(3), deadline=q(20), period=q(20))
    jobs = make_periodic_jobs([t1, t2], q(20), offline_speed={1: q("0.8")})
    assert {j.task.id: j.offline_speed for j in jobs} == {1: q("0.8"), 2: q(1)}


def test_taskset_file_round_trip(tmp_path):
    tasks = generate_taskset(GenSpec(band=(q("0.8"), q("0.85")), density_cap=q("0.3"), seed=5))
    path = tmp_path / "set.json"
    save_taskset(tasks, path)
    loaded = load_taskset(path)
    assert loaded == tasks


def test_actual_times_file_round_trip(tmp_path):
    tasks = generate_taskset(GenSpec(band=(q("0.3"), q("0.35")), density_cap=q("0.2"), seed=8))
    actual = generate_actual_times(tasks, hyperperiod(tasks), seed=4)
    path = tmp_path / "actual.json"
    save_actual_times(actual, path)
    assert load_actual_times(path) == actual
