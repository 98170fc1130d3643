import random

import pytest

from morasim import (
    XSCALE,
    ModelError,
    Task,
    UnknownSpeedError,
    UnschedulableError,
    density_test,
    min_processors,
    q,
    validate_offline_speeds,
)

from conftest import fig_tasks


def test_fig_set_passes_on_three_processors():
    assert density_test(fig_tasks(), 3)


def test_fig_set_fails_on_two_processors():
    # sufficient test only: the instance does schedule on two processors,
    # but its density sum 6353/3570 exceeds 2*(1/2) + 1/2
    assert not density_test(fig_tasks(), 2)


def test_single_full_density_task_passes_on_one():
    assert density_test([Task(id=1, wcet=q(5), deadline=q(5), period=q(5))], 1)


def test_density_test_empty_set():
    assert density_test([], 1)
    assert density_test([], 7)


def test_density_test_scaled_speed():
    tasks = fig_tasks()
    # at s = 0.4 task 3's scaled density is 8/(0.4*16) = 1.25 > 1
    assert not density_test(tasks, 3, q("0.4"))


def test_min_processors_fig_set():
    result = min_processors(fig_tasks())
    assert result.m == 3
    assert result.test_used == "density"
    assert result.margin >= 0


def test_min_processors_single_task():
    assert min_processors([Task(id=1, wcet=q(1), deadline=q(10), period=q(10))]).m == 1


def test_min_processors_ten_half_density_tasks():
    tasks = [Task(id=i, wcet=q(5), deadline=q(10), period=q(10)) for i in range(1, 11)]
    assert min_processors(tasks).m == 9  # ceil((5 - 0.5) / 0.5)


def test_min_processors_rejects_overdense_task():
    # constructing a task with C > D is impossible by the type invariant, so
    # the sizing error surfaces through the type here
    with pytest.raises(ModelError):
        Task(id=1, wcet=q(6), deadline=q(5), period=q(10))


def test_min_processors_unboundable():
    tasks = [
        Task(id=1, wcet=q(5), deadline=q(5), period=q(5)),
        Task(id=2, wcet=q(5), deadline=q(5), period=q(5)),
    ]
    with pytest.raises(UnschedulableError):
        min_processors(tasks)


def test_min_processors_minimality_and_monotonicity():
    rng = random.Random(5)
    for _ in range(60):
        n = rng.randrange(1, 9)
        tasks = []
        for i in range(1, n + 1):
            d = q(rng.randrange(4, 40))
            c = q(rng.randrange(1, 999), 1000) * d  # density < 1
            tasks.append(Task(id=i, wcet=c, deadline=d, period=d))
        res = min_processors(tasks)
        assert density_test(tasks, res.m)
        if res.m > 1:
            assert not density_test(tasks, res.m - 1)
        assert density_test(tasks, res.m + 1)  # monotone in m
        # monotone in speed scale: passing at s implies passing at s' >= s
        if density_test(tasks, res.m, q("0.8")):
            assert density_test(tasks, res.m, q("0.9"))
            assert density_test(tasks, res.m, q(1))


def test_validate_offline_speeds_all_max():
    tasks = fig_tasks()
    m = min_processors(tasks).m
    assert validate_offline_speeds(tasks, q(1), m, XSCALE)


def test_validate_offline_speeds_fig_at_04_fails():
    assert not validate_offline_speeds(fig_tasks(), q("0.4"), 3, XSCALE)


def test_validate_offline_speeds_empty():
    assert validate_offline_speeds([], {}, 1, XSCALE)


def test_validate_offline_speeds_per_task_map():
    tasks = fig_tasks()
    speeds = {t.id: q(1) for t in tasks}
    assert validate_offline_speeds(tasks, speeds, 3, XSCALE)
    speeds[3] = q("0.4")  # task 3 scaled density 1.25
    assert not validate_offline_speeds(tasks, speeds, 3, XSCALE)


def test_validate_offline_speeds_rejects_non_table_speed():
    with pytest.raises(UnknownSpeedError):
        validate_offline_speeds(fig_tasks(), q("0.5"), 3, XSCALE)


def test_validate_offline_speeds_missing_assignment():
    with pytest.raises(ModelError):
        validate_offline_speeds(fig_tasks(), {1: q(1)}, 3, XSCALE)
