"""
Utilities to support tests
"""

import os
from collections import deque

from mrtapf.gridmap import GridMap, Instance

#- statistical and full-protocol runs only when requested
long_tests = os.getenv('MRTAPF_LONG_TESTS') not in (None, '', '0')


def ascii_map(*rows):
    """
    GridMap from rows of '.' (free) and '@' (blocked)

    e.g. ascii_map('...', '.@.', '...')
    """
    blocked = [(x, y) for y, row in enumerate(rows) for x, c in enumerate(row) if c == '@']
    return GridMap(len(rows[0]), len(rows), blocked)


def empty_map(width, height):
    return GridMap(width, height)


def make_instance(rows, starts, goals, seed=0):
    """Instance on an ascii_map"""
    return Instance(ascii_map(*rows), starts, goals, seed=seed)


def bfs_distance(gridmap, source, target):
    """Reference breadth-first search; None if unreachable"""
    if source == target:
        return 0
    seen = {source: 0}
    queue = deque([source])
    while queue:
        x, y = queue.popleft()
        for dx, dy in ((0, -1), (0, 1), (-1, 0), (1, 0)):
            nxt = (x+dx, y+dy)
            if nxt not in seen and gridmap.is_free(nxt):
                seen[nxt] = seen[(x, y)] + 1
                if nxt == target:
                    return seen[nxt]
                queue.append(nxt)
    return None


def is_legal_path(gridmap, cells):
    """True if every cell is free and consecutive cells are equal or 4-adjacent"""
    if not all(gridmap.is_free(c) for c in cells):
        return False
    for (x0, y0), (x1, y1) in zip(cells[:-1], cells[1:]):
        if abs(x1-x0) + abs(y1-y0) > 1:
            return False
    return True
