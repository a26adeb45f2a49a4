"""
Recurrent conflict-based search.

Each round plans every robot from its current cell to a temporary goal
with CBS, cuts all paths at the arrival time of the fastest working robot,
and moves that robot on to its next assigned goal. Robots without tasks
left are "done": they target their current cell but still take part in
every round so CBS can move them out of the way.
"""

import time

from mrtapf.util import get_logger, check_deadline
from mrtapf.cbs import Path, cbs_solve

WORKING = 'working'
DONE = 'done'


class RoundState(object):
    def __init__(self, s_temp, g_temp, idx, status, accumulated, arrivals, rounds=0, finished=False):
        """State between recurrent CBS rounds.

        Args:
            s_temp: per-robot current cell
            g_temp: per-robot temporary goal of the last round
            idx: per-robot 1-based ordinal of the next task in its route
            status: per-robot WORKING or DONE
            accumulated: per-robot list of cells planned so far (equal lengths)
            arrivals: per-robot list of arrival timesteps of visited goals
            rounds: number of CBS invocations so far
            finished: True once a round found every robot done
        """
        self.s_temp = list(s_temp)
        self.g_temp = list(g_temp)
        self.idx = list(idx)
        self.status = list(status)
        self.accumulated = [list(cells) for cells in accumulated]
        self.arrivals = [list(a) for a in arrivals]
        self.rounds = rounds
        self.finished = finished

    @classmethod
    def initial(cls, starts, plan):
        """Round state before the first round"""
        status = [WORKING if len(route) > 0 else DONE for route in plan.routes]
        return cls(starts, starts, [1]*len(starts), status,
                   [[s] for s in starts], [[] for _ in starts])

    def copy(self):
        return RoundState(self.s_temp, self.g_temp, self.idx, self.status,
                          self.accumulated, self.arrivals, self.rounds, self.finished)

    @property
    def clock(self):
        """Current global timestep"""
        return len(self.accumulated[0]) - 1

    def __repr__(self):
        nworking = self.status.count(WORKING)
        return f'RoundState(rounds={self.rounds}, t={self.clock}, working={nworking}/{len(self.status)})'


class TimedSolution(object):
    def __init__(self, paths, per_robot_cost, rounds, arrivals=None, sa_seconds=0.0, recbs_seconds=0.0):
        """Complete timed trajectories.

        Args:
            paths: one Path per robot, all padded to the same length
            per_robot_cost: arrival timestep at each robot's final goal (0 if none)
            rounds: number of CBS invocations

        Options:
            arrivals: per-robot arrival timesteps of each goal in route order
            sa_seconds, recbs_seconds: stage wall-clock times
        """
        lengths = set(len(p) for p in paths)
        if len(lengths) > 1:
            raise ValueError(f'paths have unequal lengths {sorted(lengths)}')
        self.paths = list(paths)
        self.per_robot_cost = [int(c) for c in per_robot_cost]
        self.rounds = int(rounds)
        self.arrivals = [list(a) for a in arrivals] if arrivals is not None else None
        self.sa_seconds = float(sa_seconds)
        self.recbs_seconds = float(recbs_seconds)

    @property
    def flowtime(self):
        return sum(self.per_robot_cost)

    @property
    def makespan(self):
        """Padded length of the trajectories in timesteps"""
        return len(self.paths[0]) - 1 if self.paths else 0

    @property
    def per_robot_distance(self):
        """Number of non-wait moves per robot"""
        return [sum(1 for a, b in zip(p.cells[:-1], p.cells[1:]) if a != b) for p in self.paths]

    def __repr__(self):
        return f'TimedSolution(flowtime={self.flowtime}, makespan={self.makespan}, rounds={self.rounds})'


def advance_round(state, gridmap, plan, goals, node_limit=100000, deadline=None, loglevel=None):
    """
    One recurrent CBS round.

    Args:
        state: RoundState
        gridmap: GridMap
        plan: RoutePlan of goal indices
        goals: list of goal cells

    Options:
        node_limit: CBS constraint tree node limit
        deadline: mrtapf.util.Deadline

    Returns new RoundState; state.finished is True once every robot is done
    """
    log = get_logger(loglevel)
    state = state.copy()
    nrobots = len(state.s_temp)

    #- temporary goals
    for i in range(nrobots):
        route = plan.routes[i]
        if state.status[i] == DONE or state.idx[i] > len(route):
            state.status[i] = DONE
            state.g_temp[i] = state.s_temp[i]
        else:
            state.g_temp[i] = tuple(goals[route[state.idx[i]-1]])

    paths = cbs_solve(gridmap, state.s_temp, state.g_temp, node_limit=node_limit,
                      deadline=deadline, loglevel=loglevel)
    state.rounds += 1

    for i in range(nrobots):
        if state.status[i] == DONE:
            assert paths[i].cells[-1] == state.s_temp[i], 'done robot must end where it started the round'

    working = [i for i in range(nrobots) if state.status[i] == WORKING]
    if len(working) == 0:
        #- every path is a stationary [s_temp]; nothing to append
        state.finished = True
        log.debug(f'round {state.rounds}: all robots done at t={state.clock}')
        return state

    #- fastest working robot, lowest index on ties
    fastest = min(working, key=lambda i: (paths[i].cost, i))
    t = paths[fastest].cost

    for i in range(nrobots):
        piece = [paths[i].at(k) for k in range(t+1)]
        state.accumulated[i].extend(piece[1:])
        state.s_temp[i] = piece[-1]

    route = plan.routes[fastest]
    state.arrivals[fastest].append(state.clock)
    if state.idx[fastest] < len(route):
        state.idx[fastest] += 1
    else:
        state.status[fastest] = DONE

    log.debug(f'round {state.rounds}: robot {fastest} reached goal {route[len(state.arrivals[fastest])-1]} '
              f'after {t} steps, t={state.clock}')
    return state


def solve_recurrent(instance, plan, node_limit=100000, deadline=None, loglevel=None):
    """
    Conflict-free trajectories visiting every assigned goal in route order.

    Args:
        instance: Instance
        plan: RoutePlan covering every goal exactly once

    Options:
        node_limit: CBS constraint tree node limit per round
        deadline: mrtapf.util.Deadline

    Returns TimedSolution
    """
    log = get_logger(loglevel)
    if plan.n != instance.n:
        raise ValueError(f'plan has {plan.n} routes for {instance.n} robots')
    if not plan.is_valid(instance.m):
        raise ValueError('plan must cover every goal exactly once')

    time_start = time.perf_counter()
    state = RoundState.initial(instance.starts, plan)
    max_rounds = instance.m + instance.n + 1

    while not state.finished:
        check_deadline(deadline, 'recurrent CBS')
        assert state.rounds < max_rounds, f'recurrent CBS made no progress after {state.rounds} rounds'
        state = advance_round(state, instance.map, plan, instance.goals,
                              node_limit=node_limit, deadline=deadline, loglevel=loglevel)

    per_robot_cost = [a[-1] if a else 0 for a in state.arrivals]
    paths = [Path(cells, cost=cost) for cells, cost in zip(state.accumulated, per_robot_cost)]
    elapsed = time.perf_counter() - time_start

    log.info(f'recurrent CBS: {state.rounds} rounds, flowtime {sum(per_robot_cost)}, '
             f'makespan {state.clock}, {elapsed:.3f}s')

    return TimedSolution(paths, per_robot_cost, state.rounds, arrivals=state.arrivals,
                         recbs_seconds=elapsed)
