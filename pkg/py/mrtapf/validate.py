"""
Independent solution checking and small-instance brute-force oracles.
"""

import heapq
import itertools
import math

from mrtapf.util import get_logger
from mrtapf.distance import distance_table
from mrtapf.conflict import VERTEX, find_conflicts, step_conflict
from mrtapf.assign import RoutePlan

CONTINUITY = 'continuity'
OBSTACLE = 'obstacle'
VERTEX_CONFLICT = 'vertex_conflict'
EDGE_CONFLICT = 'edge_conflict'
GOAL_MISSED = 'goal_missed'
GOAL_DUPLICATED = 'goal_duplicated'

DEFAULT_LIMITS = dict(max_robots=2, max_goals=4, max_cells=25)


class OracleLimitError(ValueError):
    """The instance is too large for exhaustive search."""
    pass


class ValidationReport(object):
    def __init__(self, violations=None):
        """Outcome of validate(); ok iff there are no violations.

        Each violation is a dict with a 'kind' key plus details.
        """
        self.violations = list(violations) if violations is not None else list()

    @property
    def ok(self):
        return len(self.violations) == 0

    def add(self, kind, **detail):
        self.violations.append(dict(kind=kind, **detail))

    def kinds(self):
        return [v['kind'] for v in self.violations]

    def to_text(self):
        """One line per violation, for logs"""
        if self.ok:
            return 'OK: no violations'
        lines = [f'FAILED: {len(self.violations)} violations']
        for v in self.violations:
            detail = ' '.join(f'{k}={v[k]}' for k in sorted(v) if k != 'kind')
            lines.append(f'  {v["kind"]}: {detail}')
        return '\n'.join(lines)

    def __repr__(self):
        return f'ValidationReport(ok={self.ok}, violations={len(self.violations)})'


def validate(instance, solution, plan):
    """
    Check a TimedSolution against its instance and assignment.

    Checks (a) every step is a wait or a 4-adjacent move between free cells,
    (b) paths begin at the robot starts, (c) no vertex or edge conflicts at
    any timestep, (d) each robot visits its goals in route order no later
    than the recorded arrivals, (e) every goal is assigned exactly once.

    Returns ValidationReport
    """
    paths = [p.cells for p in solution.paths]
    if len(paths) != instance.n:
        raise ValueError(f'malformed solution: {len(paths)} paths for {instance.n} robots')
    lengths = set(len(cells) for cells in paths)
    if len(lengths) != 1 or 0 in lengths:
        raise ValueError(f'malformed solution: ragged or empty paths {sorted(lengths)}')

    report = ValidationReport()
    gridmap = instance.map

    #- (a), (b)
    for i, cells in enumerate(paths):
        if cells[0] != instance.starts[i]:
            report.add(CONTINUITY, robot=i, t=0, cell=cells[0],
                       detail=f'path starts at {cells[0]}, robot starts at {instance.starts[i]}')
        for t, cell in enumerate(cells):
            if not gridmap.is_free(cell):
                report.add(OBSTACLE, robot=i, t=t, cell=cell)
        for t in range(len(cells)-1):
            (x0, y0), (x1, y1) = cells[t], cells[t+1]
            if abs(x1-x0) + abs(y1-y0) > 1:
                report.add(CONTINUITY, robot=i, t=t, cell=cells[t],
                           detail=f'jump {cells[t]} -> {cells[t+1]}')

    #- (c)
    for c in find_conflicts(paths):
        if c.kind == VERTEX:
            report.add(VERTEX_CONFLICT, robots=c.robots, cell=c.u, t=c.t)
        else:
            report.add(EDGE_CONFLICT, robots=c.robots, cell=c.u, to_cell=c.v, t=c.t)

    #- (e)
    counts = [0] * instance.m
    for route in plan.routes:
        for g in route:
            if 0 <= g < instance.m:
                counts[g] += 1
    for g, count in enumerate(counts):
        if count == 0:
            report.add(GOAL_MISSED, goal=g, cell=instance.goals[g], detail='not assigned')
        elif count > 1:
            report.add(GOAL_DUPLICATED, goal=g, cell=instance.goals[g], count=count)

    #- (d)
    for i, route in enumerate(plan.routes[:len(paths)]):
        cells = paths[i]
        t = 0
        for pos, g in enumerate(route):
            if not 0 <= g < instance.m:
                continue
            target = instance.goals[g]
            while t < len(cells) and cells[t] != target:
                t += 1
            if t == len(cells):
                report.add(GOAL_MISSED, goal=g, cell=target, robot=i, detail='never visited in route order')
                break
            if solution.arrivals is not None:
                recorded = solution.arrivals[i][pos] if pos < len(solution.arrivals[i]) else None
                if recorded is None or t > recorded:
                    report.add(GOAL_MISSED, goal=g, cell=target, robot=i,
                               detail=f'visited at t={t}, recorded arrival {recorded}')

    return report


def enumerate_route_plans(n, m):
    """All ways to split goals 0..m-1 into n ordered routes"""
    for order in itertools.permutations(range(m)):
        #- choose n-1 cut points among m+1 gaps, with repetition
        for cuts in itertools.combinations_with_replacement(range(m+1), n-1):
            bounds = (0,) + cuts + (m,)
            yield RoutePlan([order[bounds[k]:bounds[k+1]] for k in range(n)])


def _joint_moves(gridmap, positions, movable):
    """Conflict-free joint successors; robots not in movable wait"""
    adjacency = gridmap.adjacency
    options = [adjacency[p] + (p,) if i in movable else (p,) for i, p in enumerate(positions)]
    for nxt in itertools.product(*options):
        ok = True
        for i in range(len(positions)):
            for j in range(i+1, len(positions)):
                if step_conflict(positions[i], nxt[i], positions[j], nxt[j]) is not None:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            yield nxt


def joint_state_optimum(gridmap, starts, goals):
    """
    Optimal sum of costs for single goals by search over joint states.

    A robot's cost is its final arrival at its goal after which it never
    moves again, matching the padding used by conflict-based search. States
    are (positions, robots that have stopped for good); each timestep costs
    the number of robots still moving. A* with the summed BFS distances as
    heuristic.

    Returns the optimal sum of costs, or None if no conflict-free solution exists
    """
    starts = tuple(tuple(s) for s in starts)
    goals = tuple(tuple(g) for g in goals)
    nrobots = len(starts)
    tables = [distance_table(gridmap, g) for g in goals]

    def h(positions, stopped):
        return sum(tables[i][p[1], p[0]] for i, p in enumerate(positions) if i not in stopped)

    start = (starts, frozenset())
    h0 = h(*start)
    if math.isinf(h0):
        return None
    open_list = [(h0, 0, 0, start)]
    best_g = {start: 0}
    counter = itertools.count(1)

    while open_list:
        f, _, g, state = heapq.heappop(open_list)
        if g > best_g.get(state, math.inf):
            continue
        positions, stopped = state
        if len(stopped) == nrobots:
            return int(g)

        successors = list()
        #- zero-cost: stop for good on the goal
        for i in range(nrobots):
            if i not in stopped and positions[i] == goals[i]:
                successors.append(((positions, stopped | {i}), 0))
        moving = set(range(nrobots)) - stopped
        for nxt in _joint_moves(gridmap, positions, moving):
            successors.append(((nxt, stopped), len(moving)))

        for succ, cost in successors:
            ng = g + cost
            if ng < best_g.get(succ, math.inf):
                hs = h(*succ)
                if math.isinf(hs):
                    continue
                best_g[succ] = ng
                heapq.heappush(open_list, (ng + hs, next(counter), ng, succ))

    return None


def _sequenced_optimum(gridmap, starts, sequences, tables, bound=math.inf):
    """
    Optimal flowtime for fixed per-robot goal sequences.

    A robot's cost is the timestep at which it completes its sequence; it may
    keep moving afterwards at no cost. Returns None if infeasible or if the
    optimum is not below bound.
    """
    nrobots = len(starts)
    goal_cells = [[tables[g].cell for g in seq] for seq in sequences]

    #- rest[i][k]: distance along sequence i from its k-th goal to its end
    rest = list()
    for seq in sequences:
        tail = [0.0] * (len(seq) + 1)
        for k in range(len(seq) - 2, -1, -1):
            x, y = tables[seq[k]].cell
            tail[k] = tail[k+1] + tables[seq[k+1]][y, x]
        rest.append(tail)

    def h(positions, progress):
        total = 0.0
        for i in range(nrobots):
            k = progress[i]
            if k < len(sequences[i]):
                x, y = positions[i]
                total += tables[sequences[i][k]][y, x] + rest[i][k]
        return total

    start = (tuple(tuple(s) for s in starts), tuple(0 for _ in range(nrobots)))
    h0 = h(*start)
    if math.isinf(h0) or h0 >= bound:
        return None
    open_list = [(h0, 0, 0, start)]
    best_g = {start: 0}
    counter = itertools.count(1)
    everyone = set(range(nrobots))

    while open_list:
        f, _, g, state = heapq.heappop(open_list)
        if f >= bound:
            return None
        if g > best_g.get(state, math.inf):
            continue
        positions, progress = state
        unfinished = sum(1 for i in range(nrobots) if progress[i] < len(sequences[i]))
        if unfinished == 0:
            return int(g)

        for nxt in _joint_moves(gridmap, positions, everyone):
            newprogress = list(progress)
            for i in range(nrobots):
                k = progress[i]
                if k < len(sequences[i]) and nxt[i] == goal_cells[i][k]:
                    newprogress[i] += 1
            succ = (nxt, tuple(newprogress))
            ng = g + unfinished
            if ng < best_g.get(succ, math.inf):
                hs = h(*succ)
                if math.isinf(hs):
                    continue
                best_g[succ] = ng
                heapq.heappush(open_list, (ng + hs, next(counter), ng, succ))

    return None


class _GoalTable(object):
    """BFS distances to one goal, indexable as [y, x]"""
    def __init__(self, gridmap, cell):
        self.cell = tuple(cell)
        self.values = distance_table(gridmap, cell)

    def __getitem__(self, key):
        return self.values[key]


def brute_force_optimum(instance, limits=None):
    """
    True optimal flowtime over every assignment and every conflict-free motion.

    Every split of the goals into ordered per-robot sequences is scored by
    A* over joint states (robot cells and per-robot goal progress); plans are
    visited in order of their collision-free route cost so most are pruned
    by the incumbent.

    Options:
        limits: dict with max_robots, max_goals, max_cells (defaults 2, 4, 25)

    Returns dict(flowtime=int, plan=RoutePlan), or None if infeasible
    """
    log = get_logger()
    limits = dict(DEFAULT_LIMITS, **(limits or {}))
    if instance.n > limits['max_robots'] or instance.m > limits['max_goals'] \
            or instance.map.size > limits['max_cells']:
        raise OracleLimitError(
            f'instance n={instance.n}, m={instance.m}, cells={instance.map.size} exceeds oracle limits {limits}')

    gridmap = instance.map
    tables = [_GoalTable(gridmap, g) for g in instance.goals]

    def lower_bound(plan):
        total = 0.0
        for k, route in enumerate(plan.routes):
            prev = instance.starts[k]
            for g in route:
                total += tables[g][prev[1], prev[0]]
                prev = instance.goals[g]
        return total

    scored = sorted(((lower_bound(p), p.routes, p) for p in enumerate_route_plans(instance.n, instance.m)),
                    key=lambda item: item[:2])

    best = None
    for lb, _, plan in scored:
        bound = best['flowtime'] if best is not None else math.inf
        if lb >= bound:
            break
        flowtime = _sequenced_optimum(gridmap, instance.starts, plan.routes, tables, bound=bound)
        if flowtime is not None and flowtime < bound:
            best = dict(flowtime=flowtime, plan=plan)

    if best is None:
        log.debug('brute-force oracle: infeasible')
    return best
