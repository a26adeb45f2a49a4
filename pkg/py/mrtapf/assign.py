"""
Goal assignment as an open-route multi-depot vehicle routing problem.

An initial plan is built with parallel greedy insertion and improved by
threshold-acceptance simulated annealing over relocate and swap moves.
"""

import math

import numpy as np

from mrtapf.util import get_logger, check_deadline


class InsertionError(RuntimeError):
    """Raised when a goal cannot be inserted at finite cost."""
    pass


class RoutePlan(object):
    def __init__(self, routes):
        """Per-robot ordered goal sequences.

        Args:
            routes: list of N sequences of goal indices; route k belongs to robot k

        RoutePlan is immutable; moves return new plans.
        """
        self.routes = tuple(tuple(int(g) for g in route) for route in routes)

    @property
    def n(self):
        return len(self.routes)

    @property
    def m(self):
        return sum(len(route) for route in self.routes)

    def goals(self):
        """All goal indices in route order"""
        return [g for route in self.routes for g in route]

    def is_valid(self, m):
        """True if every goal 0..m-1 appears in exactly one route exactly once"""
        return sorted(self.goals()) == list(range(m))

    def as_lists(self):
        return [list(route) for route in self.routes]

    def __eq__(self, other):
        if not isinstance(other, RoutePlan):
            return NotImplemented
        return self.routes == other.routes

    def __hash__(self):
        return hash(self.routes)

    def __repr__(self):
        return f'RoutePlan({self.as_lists()})'


class SAParams(object):
    def __init__(self, t_initial=0.1, max_iter=20000, seed=0):
        """Simulated annealing parameters.

        Args:
            t_initial: initial relative-gap acceptance threshold (> 0)
            max_iter: number of iterations (>= 1)
            seed: unsigned random seed
        """
        if not t_initial > 0:
            raise ValueError(f't_initial must be > 0, got {t_initial}')
        if int(max_iter) != max_iter or max_iter < 1:
            raise ValueError(f'max_iter must be a positive integer, got {max_iter}')
        if seed < 0:
            raise ValueError(f'seed must be unsigned, got {seed}')
        self.t_initial = float(t_initial)
        self.max_iter = int(max_iter)
        self.seed = int(seed)

    def __repr__(self):
        return f'SAParams(t_initial={self.t_initial}, max_iter={self.max_iter}, seed={self.seed})'


def _single_route_cost(rows, depot, route):
    prev = depot
    total = 0.0
    for g in route:
        total += rows[prev][g]
        prev = g
    return total


def _route_costs(plan, c):
    """Per-route costs with goal j mapped to matrix index n+j"""
    n = c.n
    return [_single_route_cost(c.rows, k, [n+g for g in route])
            for k, route in enumerate(plan.routes)]


def route_cost(plan, c):
    """
    Total open-route cost of a plan.

    Each route costs c[depot][first goal] plus the arcs between consecutive
    goals; returning to the depot is free.

    Returns float, inf if any arc is unreachable
    """
    if plan.n != c.n:
        raise ValueError(f'dimension mismatch: plan has {plan.n} routes, cost matrix {c.n} depots')
    for g in plan.goals():
        if not 0 <= g < c.m:
            raise ValueError(f'dimension mismatch: goal index {g} outside 0..{c.m-1}')
    return math.fsum(_route_costs(plan, c))


def _insertion_delta(rows, prev, g, nxt):
    """Cost increase of visiting g between prev and nxt (nxt None at route end)"""
    delta = rows[prev][g]
    if nxt is not None:
        delta += rows[g][nxt] - rows[prev][nxt]
    return delta


def greedy_insertion(c, n, m):
    """
    Parallel greedy insertion.

    Starting from n empty routes, repeatedly insert the uninserted goal whose
    cheapest insertion position over all routes is globally cheapest. Ties go
    to the lowest goal index, then lowest robot index, then earliest position.

    Returns RoutePlan
    """
    if c.n != n or c.m != m:
        raise ValueError(f'dimension mismatch: cost matrix is for n={c.n}, m={c.m}')
    rows = c.rows
    routes = [list() for _ in range(n)]
    remaining = list(range(m))

    while remaining:
        best = None
        for g in remaining:
            gi = n + g
            for k, route in enumerate(routes):
                prev = k
                for p in range(len(route)+1):
                    nxt = n + route[p] if p < len(route) else None
                    delta = _insertion_delta(rows, prev, gi, nxt)
                    if best is None or delta < best[0]:
                        best = (delta, g, k, p)
                    if nxt is not None:
                        prev = nxt

        delta, g, k, p = best
        if math.isinf(delta):
            raise InsertionError(
                f'goal {remaining[0]} cannot be inserted at finite cost (unreachable from every depot and goal)')
        routes[k].insert(p, g)
        remaining.remove(g)

    return RoutePlan(routes)


def relocate(plan, goal, route, position):
    """Move goal to route at position (position counted after removing goal)"""
    routes = plan.as_lists()
    for r in routes:
        if goal in r:
            r.remove(goal)
            break
    else:
        raise ValueError(f'goal {goal} not in plan')
    if not 0 <= position <= len(routes[route]):
        raise ValueError(f'position {position} out of range for route {route}')
    routes[route].insert(position, goal)
    return RoutePlan(routes)


def swap(plan, goal_a, goal_b):
    """Exchange the positions of two distinct goals"""
    if goal_a == goal_b:
        raise ValueError('swap needs two distinct goals')
    routes = plan.as_lists()
    where = dict()
    for k, r in enumerate(routes):
        for p, g in enumerate(r):
            where[g] = (k, p)
    (ka, pa), (kb, pb) = where[goal_a], where[goal_b]
    routes[ka][pa], routes[kb][pb] = goal_b, goal_a
    return RoutePlan(routes)


def _propose(routes, rng):
    """
    Random relocate-or-swap move on a list-of-lists plan.

    Returns (new routes, indices of the routes that changed)
    """
    occurrences = [(k, p) for k, r in enumerate(routes) for p in range(len(r))]
    m = len(occurrences)
    if m < 1:
        raise ValueError('cannot propose a neighbor for a plan without goals')

    use_swap = rng.random() >= 0.5
    if m == 1:
        use_swap = False

    new = [list(r) for r in routes]
    if use_swap:
        a = int(rng.integers(m))
        b = int(rng.integers(m-1))
        if b >= a:
            b += 1
        (ka, pa), (kb, pb) = occurrences[a], occurrences[b]
        new[ka][pa], new[kb][pb] = routes[kb][pb], routes[ka][pa]
        touched = {ka, kb}
    else:
        ka, pa = occurrences[int(rng.integers(m))]
        goal = new[ka].pop(pa)
        kb = int(rng.integers(len(new)))
        pb = int(rng.integers(len(new[kb])+1))
        new[kb].insert(pb, goal)
        touched = {ka, kb}
    return new, touched


def propose_neighbor(plan, rng):
    """
    Random neighbor of plan.

    With probability 1/2 relocate a uniformly chosen goal to a uniform
    position of a uniform route (possibly its own), otherwise swap two
    distinct goals. Plans with a single goal always relocate.

    Args:
        plan: RoutePlan with at least one goal
        rng: numpy.random.Generator

    Returns RoutePlan; plan is not modified
    """
    new, _ = _propose(plan.as_lists(), rng)
    return RoutePlan(new)


def _accept(f_new, f_best, threshold):
    """Threshold acceptance on the relative gap to the best-found cost"""
    if math.isinf(f_new):
        return False
    if f_best == 0:
        #- a zero-cost incumbent is optimal; only another zero-cost plan qualifies
        return f_new == 0
    return (f_new - f_best) / f_best < threshold


def simulated_annealing(initial, c, params, history=False, deadline=None):
    """
    Threshold-acceptance simulated annealing over route plans.

    Each iteration draws one relocate-or-swap neighbor s' of the current plan
    s. s' becomes current when (f(s') - f(s*)) / f(s*) < T, and replaces the
    best plan s* when also f(s') < f(s*). T starts at params.t_initial and
    decreases by t_initial / max_iter after every iteration.

    Args:
        initial: RoutePlan with finite cost
        c: CostMatrix
        params: SAParams

    Options:
        history: also return a dict with the best-cost trace and move counts
        deadline: mrtapf.util.Deadline checked between iterations

    Returns best RoutePlan, or (best RoutePlan, info dict) if history
    """
    log = get_logger()

    f_initial = route_cost(initial, c)
    if math.isinf(f_initial):
        raise ValueError('initial plan has infinite cost')

    rng = np.random.default_rng(params.seed)
    current = initial.as_lists()
    current_costs = _route_costs(initial, c)
    best = initial
    f_best = f_initial
    threshold = params.t_initial
    step = params.t_initial / params.max_iter

    trace = np.zeros(params.max_iter if initial.m > 0 else 0)
    naccepted = 0
    nimproved = 0
    n = c.n

    if initial.m > 0:
        for it in range(params.max_iter):
            if it % 256 == 0:
                check_deadline(deadline, 'simulated annealing')

            candidate, touched = _propose(current, rng)
            costs = list(current_costs)
            for k in touched:
                costs[k] = _single_route_cost(c.rows, k, [n+g for g in candidate[k]])
            f_new = math.fsum(costs)

            if _accept(f_new, f_best, threshold):
                current, current_costs = candidate, costs
                naccepted += 1
                if f_new < f_best:
                    best = RoutePlan(candidate)
                    f_best = f_new
                    nimproved += 1

            threshold -= step
            trace[it] = f_best

    log.debug(f'SA {params}: cost {f_initial} -> {f_best}, {naccepted} accepted, {nimproved} improving')

    if history:
        info = dict(trace=trace, accepted=naccepted, improved=nimproved,
                    initial_cost=f_initial, best_cost=f_best)
        return best, info
    return best
