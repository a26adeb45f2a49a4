"""
End-to-end pipeline: cost matrix, greedy insertion, simulated annealing,
recurrent CBS and validation.
"""

import time

from mrtapf.util import get_logger, Timer, Deadline
from mrtapf.distance import build_cost_matrix
from mrtapf.assign import SAParams, greedy_insertion, route_cost, simulated_annealing
from mrtapf.recurrent import solve_recurrent
from mrtapf.validate import validate


def solve_instance(instance, sa_params=None, node_limit=100000, time_limit=None, loglevel=None):
    """
    Solve an instance with annealed assignment followed by recurrent CBS.

    Args:
        instance: Instance

    Options:
        sa_params: SAParams (defaults: t_initial=0.1, max_iter=20000, seed=0)
        node_limit: CBS constraint tree node limit per round
        time_limit: wall-clock seconds for the whole pipeline, None for no limit
        loglevel: log print level

    Returns dict with keys
        cost_matrix, initial_plan, initial_cost, plan, sa_cost, sa_info,
        solution, report, timer
    """
    log = get_logger(loglevel)
    timer = Timer()
    deadline = Deadline(time_limit)
    if sa_params is None:
        sa_params = SAParams()

    log.info(f'Solving n={instance.n} robots, m={instance.m} goals on {instance.map!r}')

    #- Layer 1: assignment
    sa_start = time.perf_counter()
    c = build_cost_matrix(instance)
    timer.split('cost matrix')
    initial = greedy_insertion(c, instance.n, instance.m)
    initial_cost = route_cost(initial, c)
    timer.split('greedy insertion')
    plan, sa_info = simulated_annealing(initial, c, sa_params, history=True, deadline=deadline)
    sa_cost = sa_info['best_cost']
    sa_seconds = time.perf_counter() - sa_start
    timer.split('annealing')
    log.info(f'assignment cost {initial_cost:g} (greedy) -> {sa_cost:g} (annealed), {sa_seconds:.3f}s')

    #- Layer 2: paths
    solution = solve_recurrent(instance, plan, node_limit=node_limit, deadline=deadline, loglevel=loglevel)
    solution.sa_seconds = sa_seconds
    timer.split('recurrent cbs')

    report = validate(instance, solution, plan)
    timer.split('validate')
    if not report.ok:
        log.error(report.to_text())

    timer.log_splits(log)

    return dict(
        cost_matrix=c,
        initial_plan=initial,
        initial_cost=initial_cost,
        plan=plan,
        sa_cost=sa_cost,
        sa_info=sa_info,
        solution=solution,
        report=report,
        timer=timer,
    )
