"""
Grid-world maps, problem instances and seeded instance generation.

Cells are (x, y) tuples with x the column and y the row, origin top-left.
Occupancy arrays are indexed [y, x].
"""

import math

import numpy as np
import scipy.ndimage

from mrtapf.util import get_logger

#- neighbor order: up, down, left, right
MOVES = ((0, -1), (0, 1), (-1, 0), (1, 0))

#- retries allowed per goal that is unreachable from every start
MAX_GOAL_RESAMPLES = 100


class GenerationError(RuntimeError):
    """Raised when a random instance cannot be placed on the map."""
    pass


class GridMap(object):
    def __init__(self, width, height, blocked=()):
        """4-connected occupancy grid with unit-weight moves between free cells.

        Args:
            width: number of columns
            height: number of rows
            blocked: iterable of (x, y) blocked cells

        GridMap is immutable after construction.
        """
        width, height = int(width), int(height)
        if width < 1 or height < 1:
            raise ValueError(f'map dimensions must be positive, got {width}x{height}')
        self.width = width
        self.height = height

        mask = np.zeros((height, width), dtype=bool)
        for cell in blocked:
            x, y = int(cell[0]), int(cell[1])
            if not (0 <= x < width and 0 <= y < height):
                raise ValueError(f'blocked cell {(x, y)} out of bounds for {width}x{height} map')
            mask[y, x] = True
        mask.flags.writeable = False
        self.blocked_mask = mask
        self._adjacency = None

    @classmethod
    def from_mask(cls, blocked_mask):
        """Build a GridMap from a 2D [y, x] boolean array (True = blocked)."""
        blocked_mask = np.asarray(blocked_mask, dtype=bool)
        if blocked_mask.ndim != 2:
            raise ValueError('blocked_mask must be 2D')
        ys, xs = np.nonzero(blocked_mask)
        height, width = blocked_mask.shape
        return cls(width, height, zip(xs.tolist(), ys.tolist()))

    @property
    def shape(self):
        return (self.height, self.width)

    @property
    def size(self):
        return self.width * self.height

    @property
    def free_mask(self):
        return ~self.blocked_mask

    @property
    def blocked(self):
        """frozenset of blocked (x, y) cells"""
        ys, xs = np.nonzero(self.blocked_mask)
        return frozenset(zip(xs.tolist(), ys.tolist()))

    def in_bounds(self, cell):
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def is_free(self, cell):
        return self.in_bounds(cell) and not self.blocked_mask[cell[1], cell[0]]

    def free_cells(self):
        """List of free cells in row-major order"""
        ys, xs = np.nonzero(self.free_mask)
        return list(zip(xs.tolist(), ys.tolist()))

    def index(self, cell):
        """Row-major flat index of cell"""
        return cell[1] * self.width + cell[0]

    def cell(self, index):
        """Cell at row-major flat index"""
        y, x = divmod(int(index), self.width)
        return (x, y)

    @property
    def adjacency(self):
        """dict mapping each free cell to its tuple of free 4-neighbors (up, down, left, right)"""
        if self._adjacency is None:
            adjacency = dict()
            for cell in self.free_cells():
                x, y = cell
                adjacency[cell] = tuple(
                    (x+dx, y+dy) for dx, dy in MOVES if self.is_free((x+dx, y+dy))
                )
            self._adjacency = adjacency
        return self._adjacency

    def __eq__(self, other):
        if not isinstance(other, GridMap):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and np.array_equal(self.blocked_mask, other.blocked_mask))

    def __hash__(self):
        return hash((self.width, self.height, self.blocked_mask.tobytes()))

    def __repr__(self):
        nblocked = int(self.blocked_mask.sum())
        return f'GridMap({self.width}x{self.height}, {nblocked} blocked)'


def neighbors(gridmap, cell):
    """Free 4-neighbors of cell in the order up, down, left, right.

    Waits are not included.
    """
    cell = (int(cell[0]), int(cell[1]))
    if not gridmap.in_bounds(cell):
        raise ValueError(f'cell {cell} out of bounds')
    if not gridmap.is_free(cell):
        raise ValueError(f'cell {cell} is blocked')
    return list(gridmap.adjacency[cell])


def parse_map(text):
    """
    Parse a MovingAI-style map from text.

    Format:
        type octile
        height H
        width W
        map
        H rows of W characters, '.' free and '@' blocked

    Returns GridMap
    """
    lines = text.splitlines()
    #- tolerate trailing blank lines only
    while len(lines) > 0 and lines[-1].strip() == '':
        lines.pop()

    if len(lines) < 4:
        raise ValueError('malformed header: expected type/height/width/map lines')

    header = [line.split() for line in lines[:4]]
    try:
        if header[0] != ['type', 'octile']:
            raise ValueError
        if header[1][0] != 'height' or header[2][0] != 'width' or header[3] != ['map']:
            raise ValueError
        height = int(header[1][1])
        width = int(header[2][1])
        if len(header[1]) != 2 or len(header[2]) != 2:
            raise ValueError
    except (ValueError, IndexError):
        raise ValueError('malformed header: {}'.format(' | '.join(lines[:4])))
    if width < 1 or height < 1:
        raise ValueError(f'malformed header: non-positive dimensions {width}x{height}')

    rows = [line.rstrip('\r') for line in lines[4:]]
    if len(rows) != height:
        raise ValueError(f'row count mismatch: header says {height}, found {len(rows)}')

    blocked = list()
    for y, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f'row width mismatch on row {y}: expected {width}, found {len(row)}')
        for x, c in enumerate(row):
            if c == '@':
                blocked.append((x, y))
            elif c != '.':
                raise ValueError(f'illegal character {c!r} at {(x, y)}')

    return GridMap(width, height, blocked)


def render_map(gridmap):
    """Render a GridMap in the format read by parse_map."""
    lines = ['type octile', f'height {gridmap.height}', f'width {gridmap.width}', 'map']
    for y in range(gridmap.height):
        lines.append(''.join('@' if b else '.' for b in gridmap.blocked_mask[y]))
    return '\n'.join(lines) + '\n'


class Instance(object):
    def __init__(self, gridmap, starts, goals, seed=0):
        """A task assignment and path-finding problem.

        Args:
            gridmap: GridMap
            starts: list of N robot start cells
            goals: list of M goal cells
            seed: generator seed (0 if hand-authored)
        """
        self.map = gridmap
        self.starts = tuple((int(x), int(y)) for x, y in starts)
        self.goals = tuple((int(x), int(y)) for x, y in goals)
        self.seed = int(seed)

        if len(self.starts) < 1:
            raise ValueError('an instance needs at least one robot')
        for cell in self.starts + self.goals:
            if not gridmap.is_free(cell):
                raise ValueError(f'cell {cell} is blocked or out of bounds')
        if len(set(self.starts)) != len(self.starts):
            raise ValueError('robot starts must be pairwise distinct')
        if len(set(self.goals)) != len(self.goals):
            raise ValueError('goals must be pairwise distinct')
        if set(self.starts) & set(self.goals):
            raise ValueError('a goal may not coincide with a start')

    @property
    def n(self):
        return len(self.starts)

    @property
    def m(self):
        return len(self.goals)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.map == other.map and self.starts == other.starts
                and self.goals == other.goals and self.seed == other.seed)

    def __repr__(self):
        return f'Instance({self.map!r}, n={self.n}, m={self.m}, seed={self.seed})'


def _component_labels(gridmap):
    """4-connected component labels of free cells, 0 on blocked cells"""
    labels, _ = scipy.ndimage.label(gridmap.free_mask)
    return labels


def generate_instance(width, height, obstacle_ratio, n, m, seed):
    """
    Generate a random instance.

    Obstacles are sampled first (floor(obstacle_ratio * width * height)
    distinct cells), then starts and goals from the remaining free cells
    without replacement. A goal that no start can reach is resampled up to
    MAX_GOAL_RESAMPLES times.

    Args:
        width, height: map dimensions
        obstacle_ratio: fraction of cells to block, in [0, 1)
        n: number of robots (>= 1)
        m: number of goals (>= 0)
        seed: unsigned integer seed

    Returns Instance
    """
    log = get_logger()

    if n < 1:
        raise ValueError(f'n must be >= 1, got {n}')
    if m < 0:
        raise ValueError(f'm must be >= 0, got {m}')
    if not 0.0 <= obstacle_ratio < 1.0:
        raise ValueError(f'obstacle_ratio must be in [0, 1), got {obstacle_ratio}')
    if seed < 0:
        raise ValueError(f'seed must be unsigned, got {seed}')

    ncells = width * height
    #- small epsilon so that e.g. 0.29*100 rounds to 29, not 28
    nobstacles = int(math.floor(obstacle_ratio * ncells + 1e-9))
    if n + m > ncells - nobstacles:
        raise GenerationError(
            f'insufficient free cells: {n}+{m} placements, {ncells - nobstacles} free cells')

    rng = np.random.default_rng(seed)
    obstacles = rng.choice(ncells, size=nobstacles, replace=False)
    mask = np.zeros(ncells, dtype=bool)
    mask[obstacles] = True
    gridmap = GridMap.from_mask(mask.reshape(height, width))

    free = np.flatnonzero(~mask)
    picks = rng.choice(free, size=n+m, replace=False)
    starts = [gridmap.cell(i) for i in picks[:n]]
    goals = [gridmap.cell(i) for i in picks[n:]]

    #- goals must share a component with at least one start
    labels = _component_labels(gridmap)
    start_labels = set(labels[y, x] for x, y in starts)
    used = set(starts) | set(goals)
    candidates = [gridmap.cell(i) for i in free]
    for j in range(m):
        retries = 0
        while labels[goals[j][1], goals[j][0]] not in start_labels:
            if retries >= MAX_GOAL_RESAMPLES:
                raise GenerationError(
                    f'retry budget exhausted placing reachable goal {j} (seed {seed})')
            retries += 1
            cell = candidates[int(rng.integers(len(candidates)))]
            if cell in used:
                continue
            used.discard(goals[j])
            goals[j] = cell
            used.add(cell)
        if retries > 0:
            log.debug(f'goal {j} resampled {retries} times')

    return Instance(gridmap, starts, goals, seed=seed)
