"""
Vertex and edge conflict definitions shared by the search, the validator
and the joint-state oracle.

Paths are padded by repeating their last cell: a robot that has finished
stays where it is.
"""

from collections import namedtuple

VERTEX = 'vertex'
EDGE = 'edge'

#- vertex: robots occupy u at t; edge: robots[0] moves u->v and robots[1] v->u between t and t+1
Conflict = namedtuple('Conflict', ['robots', 'kind', 'u', 'v', 't'])


def cell_at(cells, t):
    """Cell occupied at timestep t with end padding"""
    return cells[t] if t < len(cells) else cells[-1]


def step_conflict(a_from, a_to, b_from, b_to):
    """
    Conflict between two simultaneous moves a_from->a_to and b_from->b_to.

    Returns VERTEX if both end in the same cell, EDGE if they swap cells
    across one edge, else None.
    """
    if a_to == b_to:
        return VERTEX
    if a_from != a_to and a_to == b_from and b_to == a_from:
        return EDGE
    return None


def find_conflicts(cell_lists, first_only=False):
    """
    All conflicts among padded paths in canonical order.

    Timesteps are scanned in increasing order; at each t vertex conflicts
    come before edge conflicts (edge conflicts at t span t -> t+1), and
    within a kind robot pairs are in lexicographic index order.

    Args:
        cell_lists: one sequence of cells per robot

    Options:
        first_only: stop at the first conflict

    Returns list of Conflict
    """
    conflicts = list()
    if len(cell_lists) == 0:
        return conflicts
    horizon = max(len(cells) for cells in cell_lists)
    nrobots = len(cell_lists)

    for t in range(horizon):
        here = [cell_at(cells, t) for cells in cell_lists]

        #- vertex conflicts at t
        occupants = dict()
        for i in range(nrobots):
            occupants.setdefault(here[i], list()).append(i)
        found = list()
        for cell, robots in occupants.items():
            if len(robots) > 1:
                for a in range(len(robots)):
                    for b in range(a+1, len(robots)):
                        found.append(Conflict((robots[a], robots[b]), VERTEX, cell, None, t))
        found.sort(key=lambda c: c.robots)
        conflicts.extend(found)
        if first_only and conflicts:
            return conflicts[:1]

        if t+1 >= horizon:
            break

        #- edge conflicts between t and t+1
        there = [cell_at(cells, t+1) for cells in cell_lists]
        moves = dict()
        for i in range(nrobots):
            if here[i] != there[i]:
                moves[(here[i], there[i])] = i
        found = list()
        for (u, v), i in moves.items():
            j = moves.get((v, u))
            if j is not None and i < j:
                found.append(Conflict((i, j), EDGE, u, v, t))
        found.sort(key=lambda c: c.robots)
        conflicts.extend(found)
        if first_only and conflicts:
            return conflicts[:1]

    return conflicts
