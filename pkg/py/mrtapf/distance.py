"""
Shortest-path distances on grid maps and the routing cost matrix.
"""

import numpy as np
import numba
import scipy.sparse
from scipy.sparse.csgraph import shortest_path

from mrtapf.util import get_logger

#- marker for unreachable pairs
UNREACHABLE = np.inf


@numba.jit(nopython=True)
def _bfs_grid(free, sx, sy):
    '''
    Breadth-first search distances from (sx, sy) over a 4-connected grid

    Args:
        free: 2D bool array [y, x], True for passable cells
        sx, sy: source cell

    Returns 2D float array [y, x] of step counts, inf where unreachable
    '''
    height, width = free.shape
    dist = np.full((height, width), np.inf)
    queue = np.empty(height*width, dtype=np.int64)
    dist[sy, sx] = 0.0
    queue[0] = sy*width + sx
    head = 0
    tail = 1
    while head < tail:
        i = queue[head]
        head += 1
        y = i // width
        x = i - y*width
        d = dist[y, x] + 1.0
        #- up, down, left, right
        if y > 0 and free[y-1, x] and dist[y-1, x] == np.inf:
            dist[y-1, x] = d
            queue[tail] = i - width
            tail += 1
        if y < height-1 and free[y+1, x] and dist[y+1, x] == np.inf:
            dist[y+1, x] = d
            queue[tail] = i + width
            tail += 1
        if x > 0 and free[y, x-1] and dist[y, x-1] == np.inf:
            dist[y, x-1] = d
            queue[tail] = i - 1
            tail += 1
        if x < width-1 and free[y, x+1] and dist[y, x+1] == np.inf:
            dist[y, x+1] = d
            queue[tail] = i + 1
            tail += 1
    return dist


def _check_free(gridmap, cell):
    if not gridmap.in_bounds(cell):
        raise ValueError(f'cell {tuple(cell)} out of bounds')
    if not gridmap.is_free(cell):
        raise ValueError(f'cell {tuple(cell)} is blocked')


def distance_table(gridmap, cell):
    """
    Single-source BFS distances from cell to every cell of the map

    Returns 2D float array [y, x]; blocked and unreachable cells are inf
    """
    _check_free(gridmap, cell)
    return _bfs_grid(gridmap.free_mask, int(cell[0]), int(cell[1]))


def shortest_dist(gridmap, source, target):
    """
    Minimum number of 4-connected unit steps from source to target.

    Returns an int, or UNREACHABLE (inf) if target is in another component.
    """
    _check_free(gridmap, source)
    _check_free(gridmap, target)
    d = distance_table(gridmap, source)[target[1], target[0]]
    return UNREACHABLE if np.isinf(d) else int(d)


def grid_graph(gridmap):
    """
    Sparse adjacency matrix of the 4-connected free cells

    Nodes are row-major cell indices; blocked cells are isolated nodes.
    Each undirected edge is stored once (upper triangle).
    """
    free = gridmap.free_mask
    index = np.arange(gridmap.size).reshape(gridmap.shape)

    horizontal = free[:, :-1] & free[:, 1:]
    vertical = free[:-1, :] & free[1:, :]
    rows = np.concatenate([index[:, :-1][horizontal], index[:-1, :][vertical]])
    cols = np.concatenate([index[:, 1:][horizontal], index[1:, :][vertical]])
    data = np.ones(len(rows))
    return scipy.sparse.csr_matrix((data, (rows, cols)), shape=(gridmap.size, gridmap.size))


class CostMatrix(object):
    def __init__(self, values, n, m):
        """(n+m) x (n+m) routing costs.

        Indices 0..n-1 are depots (robot starts), n..n+m-1 are goals.
        Columns of depots are zero so that routes are open (no return).

        Args:
            values: 2D float array, inf for unreachable pairs
            n: number of depots
            m: number of goals
        """
        values = np.array(values, dtype=float)
        if values.shape != (n+m, n+m):
            raise ValueError(f'cost matrix shape {values.shape} does not match n={n}, m={m}')
        values.flags.writeable = False
        self.values = values
        self.n = n
        self.m = m
        #- nested lists for fast scalar lookups in the annealing loop
        self.rows = values.tolist()

    @property
    def size(self):
        return self.n + self.m

    @property
    def labels(self):
        return [f'd{k}' for k in range(self.n)] + [f'g{j}' for j in range(self.m)]

    def __getitem__(self, key):
        return self.values[key]

    def __repr__(self):
        return f'CostMatrix(n={self.n}, m={self.m})'


def build_cost_matrix(instance):
    """
    Build the open-route multi-depot cost matrix for an instance.

    Row i holds BFS distances from vertex i (depot or goal) to every goal;
    depot columns are 0. One single-source search is run per vertex.

    Returns CostMatrix
    """
    log = get_logger()
    gridmap = instance.map
    n, m = instance.n, instance.m
    vertices = list(instance.starts) + list(instance.goals)
    sources = [gridmap.index(cell) for cell in vertices]

    graph = grid_graph(gridmap)
    dist = shortest_path(graph, directed=False, unweighted=True, indices=sources)
    dist = np.atleast_2d(dist)

    values = dist[:, sources]
    values[:, :n] = 0.0
    np.fill_diagonal(values, 0.0)

    nunreachable = int(np.isinf(values).sum())
    if nunreachable > 0:
        log.debug(f'{nunreachable} unreachable pairs in {n+m}x{n+m} cost matrix')

    return CostMatrix(values, n, m)
