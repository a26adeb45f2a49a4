"""
Conflict-based search for one assignment round: a best-first constraint
tree at the high level and space-time A* per robot at the low level.
"""

import heapq
import itertools
import math
from collections import namedtuple

import numpy as np

from mrtapf.util import get_logger, check_deadline
from mrtapf.distance import distance_table
from mrtapf.conflict import Conflict, VERTEX, EDGE, cell_at, find_conflicts


class LowLevelExhausted(RuntimeError):
    """No path exists for a robot under its constraints."""
    pass


class UnreachableGoal(LowLevelExhausted):
    """A robot cannot reach its goal even without constraints."""
    pass


class CBSLimitExceeded(RuntimeError):
    """The constraint tree hit its node limit or ran out of nodes."""
    pass


class Path(object):
    def __init__(self, cells, cost=None):
        """Timestep-indexed sequence of cells.

        Args:
            cells: cells at t = 0, 1, ..., T
            cost: arrival timestep; defaults to len(cells) - 1
        """
        self.cells = tuple((int(x), int(y)) for x, y in cells)
        if len(self.cells) == 0:
            raise ValueError('a path needs at least one cell')
        self.cost = len(self.cells) - 1 if cost is None else int(cost)

    def __len__(self):
        return len(self.cells)

    def at(self, t):
        """Cell at timestep t, padded with the final cell"""
        return cell_at(self.cells, t)

    def __eq__(self, other):
        if not isinstance(other, Path):
            return NotImplemented
        return self.cells == other.cells and self.cost == other.cost

    def __repr__(self):
        return f'Path(cost={self.cost}, cells={list(self.cells)})'


#- vertex: forbids robot at cell at t; edge: forbids robot moving cell -> to_cell between t and t+1
Constraint = namedtuple('Constraint', ['robot', 'kind', 'cell', 'to_cell', 't'])


def vertex_constraint(robot, cell, t):
    if t < 1:
        raise ValueError('vertex constraints need t >= 1')
    return Constraint(robot, VERTEX, tuple(cell), None, int(t))


def edge_constraint(robot, cell_from, cell_to, t):
    if t < 0:
        raise ValueError('edge constraints need t >= 0')
    return Constraint(robot, EDGE, tuple(cell_from), tuple(cell_to), int(t))


class CTNode(object):
    _counter = itertools.count()

    def __init__(self, constraints, paths, parent_soc=None):
        """Constraint tree node.

        Args:
            constraints: frozenset of Constraint
            paths: one Path per robot, each optimal under its constraints

        Options:
            parent_soc: sum of costs of the node this one was split from
        """
        self.constraints = constraints
        self.parent_soc = parent_soc
        self.paths = paths
        self.soc = sum(p.cost for p in paths)
        self.conflicts = find_conflicts([p.cells for p in paths])
        self.order = next(CTNode._counter)

    def key(self):
        """best-first order: sum of costs, then fewer conflicts, then FIFO"""
        return (self.soc, len(self.conflicts), self.order)

    def __lt__(self, other):
        return self.key() < other.key()


def low_level_search(gridmap, start, goal, constraints=(), heuristic=None, deadline=None):
    """
    Space-time A* for one robot.

    Actions are up/down/left/right/wait. The robot is done at the first
    timestep it stands on goal after every vertex constraint on goal.

    Args:
        gridmap: GridMap
        start, goal: free cells
        constraints: iterable of Constraint for this robot

    Options:
        heuristic: distance_table(gridmap, goal), computed if None
        deadline: mrtapf.util.Deadline

    Returns Path with cost = arrival timestep
    """
    start = (int(start[0]), int(start[1]))
    goal = (int(goal[0]), int(goal[1]))
    for cell in (start, goal):
        if not gridmap.is_free(cell):
            raise ValueError(f'cell {cell} is blocked or out of bounds')
    if heuristic is None:
        heuristic = distance_table(gridmap, goal)
    #- nested lists index faster than numpy scalars in the inner loop
    if isinstance(heuristic, np.ndarray):
        heuristic = heuristic.tolist()

    vertex = set()
    edge = set()
    max_t = 0
    goal_free_after = 0
    for c in constraints:
        if c.kind == VERTEX:
            vertex.add((c.cell, c.t))
            if c.cell == goal:
                goal_free_after = max(goal_free_after, c.t)
        else:
            edge.add((c.cell, c.to_cell, c.t))
        max_t = max(max_t, c.t)

    horizon = 2 * gridmap.size + max_t
    adjacency = gridmap.adjacency

    h0 = heuristic[start[1]][start[0]]
    if math.isinf(h0):
        raise LowLevelExhausted(f'low-level exhausted: {goal} unreachable from {start}')

    #- heap entries: (f, t, x, y, parent state)
    open_list = [(int(h0), 0, start[0], start[1], None)]
    parents = dict()
    closed = set()
    nexpanded = 0

    while open_list:
        f, t, x, y, parent = heapq.heappop(open_list)
        cell = (x, y)
        #- past the last constraint, time no longer matters
        closed_key = (cell, min(t, max_t + 1))
        if closed_key in closed:
            continue
        closed.add(closed_key)
        parents[(cell, t)] = parent

        if cell == goal and t >= goal_free_after:
            cells = [cell]
            state = parent
            while state is not None:
                cells.append(state[0])
                state = parents[state]
            cells.reverse()
            return Path(cells, cost=t)

        nexpanded += 1
        if nexpanded % 1024 == 0:
            check_deadline(deadline, 'low-level search')
        if t >= horizon:
            continue

        nt = t + 1
        for nxt in adjacency[cell] + (cell,):
            if (nxt, nt) in vertex:
                continue
            if (cell, nxt, t) in edge:
                continue
            if (nxt, min(nt, max_t + 1)) in closed:
                continue
            h = heuristic[nxt[1]][nxt[0]]
            if math.isinf(h):
                continue
            heapq.heappush(open_list, (nt + int(h), nt, nxt[0], nxt[1], (cell, t)))

    raise LowLevelExhausted(f'low-level exhausted: no path {start} -> {goal} under {len(vertex)+len(edge)} constraints')


def detect_first_conflict(paths):
    """
    First conflict among padded paths, or None.

    Order: increasing t, vertex before edge at equal t, then robot pairs in
    index order.
    """
    if len(paths) < 1:
        raise ValueError('need at least one path')
    conflicts = find_conflicts([p.cells for p in paths], first_only=True)
    return conflicts[0] if conflicts else None


def _split(conflict):
    """The two constraints resolving a conflict, one per robot"""
    i, j = conflict.robots
    if conflict.kind == VERTEX:
        return (vertex_constraint(i, conflict.u, conflict.t),
                vertex_constraint(j, conflict.u, conflict.t))
    return (edge_constraint(i, conflict.u, conflict.v, conflict.t),
            edge_constraint(j, conflict.v, conflict.u, conflict.t))


def cbs_solve(gridmap, starts, goals, node_limit=100000, deadline=None, stats=None, loglevel=None):
    """
    Optimal sum-of-costs conflict-based search.

    Args:
        gridmap: GridMap
        starts: list of pairwise distinct free start cells
        goals: list of free goal cells, one per robot

    Options:
        node_limit: maximum number of expanded constraint tree nodes
        deadline: mrtapf.util.Deadline checked at every expansion
        stats: dict filled with 'expanded', 'generated', 'soc', the solution
            node's 'constraints' and 'trace', a (parent_soc, soc) pair per
            expanded node
        loglevel: log print level

    Returns list of Path, conflict-free under end padding
    """
    log = get_logger(loglevel)
    starts = [tuple(s) for s in starts]
    goals = [tuple(g) for g in goals]
    if len(starts) != len(goals):
        raise ValueError(f'{len(starts)} starts but {len(goals)} goals')
    if len(set(starts)) != len(starts):
        raise ValueError('starts must be pairwise distinct')

    heuristics = dict()
    for g in goals:
        if g not in heuristics:
            heuristics[g] = distance_table(gridmap, g).tolist()

    def plan(i, constraints):
        mine = [c for c in constraints if c.robot == i]
        return low_level_search(gridmap, starts[i], goals[i], mine,
                                heuristic=heuristics[goals[i]], deadline=deadline)

    root_paths = list()
    for i in range(len(starts)):
        try:
            root_paths.append(plan(i, ()))
        except LowLevelExhausted as err:
            raise UnreachableGoal(f'unreachable goal for robot {i}: {err}')

    root = CTNode(frozenset(), root_paths)
    open_list = [root]
    nexpanded = 0
    ngenerated = 1
    trace = list()
    if stats is not None:
        stats.update(trace=trace, constraints=None)

    while open_list:
        check_deadline(deadline, 'conflict-based search')
        node = heapq.heappop(open_list)
        nexpanded += 1
        if stats is not None:
            trace.append((node.parent_soc, node.soc))

        if len(node.conflicts) == 0:
            log.debug(f'CBS solved {len(starts)} robots: soc={node.soc}, {nexpanded} nodes expanded')
            if stats is not None:
                stats.update(expanded=nexpanded, generated=ngenerated, soc=node.soc,
                             constraints=node.constraints)
            return list(node.paths)

        if nexpanded >= node_limit:
            if stats is not None:
                stats.update(expanded=nexpanded, generated=ngenerated, soc=None)
            raise CBSLimitExceeded(f'CBS limit exceeded: {node_limit} nodes expanded')

        conflict = node.conflicts[0]
        for constraint in _split(conflict):
            if constraint in node.constraints:
                continue
            constraints = node.constraints | {constraint}
            try:
                path = plan(constraint.robot, constraints)
            except LowLevelExhausted:
                continue
            paths = list(node.paths)
            paths[constraint.robot] = path
            heapq.heappush(open_list, CTNode(constraints, paths, parent_soc=node.soc))
            ngenerated += 1

    if stats is not None:
        stats.update(expanded=nexpanded, generated=ngenerated, soc=None)
    raise CBSLimitExceeded(f'CBS limit exceeded: constraint tree exhausted after {nexpanded} nodes')
