import pytest

from morasim import Job, Task, q


def fig_tasks():
    """The five-task two-processor system used as the worked example
    throughout the suite: (C, D, T) = (6,14,30), (6,15,35), (8,16,40),
    (2,17,45), (6,18,50), all energy factors 1."""
    params = [(6, 14, 30), (6, 15, 35), (8, 16, 40), (2, 17, 45), (6, 18, 50)]
    return [
        Task(id=i, wcet=q(c), deadline=q(d), period=q(t))
        for i, (c, d, t) in enumerate(params, start=1)
    ]


def fig_jobs(tasks, actual=(3, 2, 3, 2, 6), offline_speed=q(1)):
    """First job of each task, all arriving at 0."""
    return [
        Job(task=t, index=1, arrival=q(0), actual_exec=q(a), offline_speed=offline_speed)
        for t, a in zip(tasks, actual)
    ]


@pytest.fixture
def fig_system():
    tasks = fig_tasks()
    return tasks, fig_jobs(tasks)
