"""
Benchmark protocol: seeded random instances for every (robots, goals) cell,
solved under a wall-clock limit, with per-instance rows and per-cell
summary statistics.
"""

import os
import sys
import json
import time
import functools
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from astropy.table import Table

from mrtapf.util import get_logger, worker_count, quartiles, TimeLimitExceeded
from mrtapf.gridmap import GenerationError, generate_instance
from mrtapf.assign import SAParams, InsertionError
from mrtapf.cbs import LowLevelExhausted, CBSLimitExceeded
from mrtapf.core import solve_instance
from mrtapf.io import write_solution
from mrtapf.mpi import NoMPICoordinator

ROW_COLUMNS = ('n', 'm', 'instance', 'seed', 'solved',
               'sa_seconds', 'recbs_seconds', 'total_seconds', 'flowtime', 'rounds')
ROW_DTYPES = (int, int, int, int, int, float, float, float, int, int)
STAGES = ('sa_seconds', 'recbs_seconds', 'total_seconds')

#- failures that count as an unsolved instance rather than a crash
SOLVER_FAILURES = (GenerationError, InsertionError, LowLevelExhausted,
                   CBSLimitExceeded, TimeLimitExceeded)


class BenchConfig(object):

    defaults = dict(
        robot_counts=[5, 10, 20],
        goal_counts=[10, 20, 30, 40],
        instances_per_cell=40,
        map_width=32,
        map_height=32,
        obstacle_ratio=0.40,
        time_limit_seconds=60.0,
        seed_base=0,
        sa=dict(t_initial=0.1, max_iter=20000),
        node_limit=100000,
    )

    def __init__(self, **kwargs):
        """Benchmark settings; any field left out takes its default.

        Raises ValueError on unknown keys or invalid values.
        """
        unknown = set(kwargs) - set(self.defaults)
        if unknown:
            raise ValueError(f'unknown benchmark config keys {sorted(unknown)}')
        values = dict(self.defaults, **kwargs)

        self.robot_counts = _positive_ints(values['robot_counts'], 'robot_counts')
        self.goal_counts = _positive_ints(values['goal_counts'], 'goal_counts')
        self.instances_per_cell = _int(values['instances_per_cell'], 'instances_per_cell')
        if self.instances_per_cell < 0:
            raise ValueError(f'instances_per_cell must be >= 0, got {self.instances_per_cell}')
        self.map_width = _int(values['map_width'], 'map_width')
        self.map_height = _int(values['map_height'], 'map_height')
        if self.map_width < 1 or self.map_height < 1:
            raise ValueError(f'map dimensions must be positive, got {self.map_width}x{self.map_height}')
        self.obstacle_ratio = float(values['obstacle_ratio'])
        if not 0.0 <= self.obstacle_ratio < 1.0:
            raise ValueError(f'obstacle_ratio must be in [0, 1), got {self.obstacle_ratio}')
        self.time_limit_seconds = float(values['time_limit_seconds'])
        if not self.time_limit_seconds > 0:
            raise ValueError(f'time_limit_seconds must be > 0, got {self.time_limit_seconds}')
        self.seed_base = _int(values['seed_base'], 'seed_base')
        if self.seed_base < 0:
            raise ValueError(f'seed_base must be unsigned, got {self.seed_base}')
        self.node_limit = _int(values['node_limit'], 'node_limit')
        if self.node_limit < 1:
            raise ValueError(f'node_limit must be positive, got {self.node_limit}')

        sa = dict(self.defaults['sa'], **(values['sa'] or {}))
        unknown = set(sa) - set(self.defaults['sa'])
        if unknown:
            raise ValueError(f'unknown sa keys {sorted(unknown)}')
        #- validated here, per-instance seeds are set in sa_params()
        SAParams(sa['t_initial'], sa['max_iter'])
        self.sa = dict(t_initial=float(sa['t_initial']), max_iter=int(sa['max_iter']))

    @classmethod
    def read(cls, filename):
        """Read a JSON benchmark config"""
        with open(filename) as fx:
            try:
                data = json.load(fx)
            except json.JSONDecodeError as err:
                raise ValueError(f'{filename}: not valid JSON: {err}')
        if not isinstance(data, dict):
            raise ValueError(f'{filename}: config must be a JSON object')
        return cls(**data)

    def to_dict(self):
        return dict((key, getattr(self, key)) for key in self.defaults)

    def cells(self):
        """(n, m) pairs in sorted order"""
        return [(n, m) for n in sorted(self.robot_counts) for m in sorted(self.goal_counts)]

    def tasks(self):
        """(n, m, instance index) for every benchmark instance, sorted"""
        return [(n, m, k) for n, m in self.cells() for k in range(self.instances_per_cell)]

    def sa_params(self, seed):
        return SAParams(self.sa['t_initial'], self.sa['max_iter'], seed=seed)

    def __repr__(self):
        return f'BenchConfig({self.to_dict()})'


def _int(value, name):
    try:
        ok = not isinstance(value, bool) and int(value) == value
    except (TypeError, ValueError):
        ok = False
    if not ok:
        raise ValueError(f'{name} must be an integer, got {value!r}')
    return int(value)


def _positive_ints(values, name):
    if not isinstance(values, (list, tuple)) or len(values) == 0:
        raise ValueError(f'{name} must be a non-empty list')
    values = [_int(v, name) for v in values]
    if min(values) < 1:
        raise ValueError(f'{name} must be positive, got {values}')
    return values


def instance_seed(config, n, m, index):
    """Per-instance seed; any single row can be rerun from (n, m, index) alone"""
    return config.seed_base + (n*1000 + m)*1000 + index


def solution_filename(dirname, n, m, index):
    return os.path.join(dirname, f'n{n:03d}_m{m:03d}_i{index:03d}.json')


def run_instance(config, task, solutions_dir=None, deterministic=False, loglevel=None):
    """
    Generate, solve and validate one benchmark instance.

    Args:
        config: BenchConfig
        task: (n, m, instance index)

    Options:
        solutions_dir: directory to keep the solution JSON of solved instances
        deterministic: zero the wall-clock columns after deciding solved
        loglevel: log print level

    Returns dict with the ROW_COLUMNS keys; unsolved rows have flowtime = rounds = -1
    """
    log = get_logger(loglevel)
    n, m, index = task
    seed = instance_seed(config, n, m, index)
    row = dict(n=n, m=m, instance=index, seed=seed, solved=0,
               sa_seconds=np.nan, recbs_seconds=np.nan, total_seconds=np.nan,
               flowtime=-1, rounds=-1)

    time_start = time.perf_counter()
    try:
        instance = generate_instance(config.map_width, config.map_height, config.obstacle_ratio,
                                     n, m, seed)
        result = solve_instance(instance, sa_params=config.sa_params(seed),
                                node_limit=config.node_limit,
                                time_limit=config.time_limit_seconds, loglevel=loglevel)
    except SOLVER_FAILURES as err:
        row['total_seconds'] = time.perf_counter() - time_start
        log.warning(f'n={n} m={m} instance={index} seed={seed}: {type(err).__name__}: {err}')
    else:
        row['total_seconds'] = time.perf_counter() - time_start
        solution = result['solution']
        row['sa_seconds'] = solution.sa_seconds
        row['recbs_seconds'] = solution.recbs_seconds
        row['flowtime'] = solution.flowtime
        row['rounds'] = solution.rounds
        if result['report'].ok and row['total_seconds'] <= config.time_limit_seconds:
            row['solved'] = 1
            if solutions_dir is not None:
                write_solution(solution_filename(solutions_dir, n, m, index), solution,
                               plan=result['plan'], deterministic=deterministic)
        else:
            log.warning(f'n={n} m={m} instance={index} seed={seed}: not solved '
                        f'(valid={result["report"].ok}, {row["total_seconds"]:.2f}s)')

    if deterministic:
        for key in STAGES:
            if not np.isnan(row[key]):
                row[key] = 0.0

    log.info(f'n={n} m={m} instance={index} solved={row["solved"]} '
             f'flowtime={row["flowtime"]} total={row["total_seconds"]:.3f}s')
    return row


def rows_table(rows):
    """astropy Table of benchmark rows sorted by (n, m, instance)"""
    rows = sorted(rows, key=lambda r: (r['n'], r['m'], r['instance']))
    table = Table(names=ROW_COLUMNS, dtype=ROW_DTYPES)
    for r in rows:
        table.add_row([r[name] for name in ROW_COLUMNS])
    for name in STAGES:
        table[name].format = '.6f'
    return table


def summarize(rows):
    """
    Per-cell summary: instance count, success rate and min/q1/median/q3/max
    of each stage time over the solved rows.

    Args:
        rows: Table from rows_table

    Returns Table with one row per (n, m) present in rows
    """
    names = ['n', 'm', 'instances', 'solved', 'success_rate']
    dtypes = [int, int, int, int, float]
    for stage in STAGES:
        for stat in ('min', 'q1', 'median', 'q3', 'max'):
            names.append(f'{stage}_{stat}')
            dtypes.append(float)
    summary = Table(names=names, dtype=dtypes)

    if len(rows) > 0:
        grouped = rows.group_by(['n', 'm'])
        for key, group in zip(grouped.groups.keys, grouped.groups):
            solved = group['solved'] == 1
            nsolved = int(np.count_nonzero(solved))
            values = [int(key['n']), int(key['m']), len(group), nsolved, nsolved / len(group)]
            for stage in STAGES:
                values.extend(quartiles(group[stage][solved]))
            summary.add_row(values)

    summary['success_rate'].format = '.4f'
    for name in names[5:]:
        summary[name].format = '.6f'
    return summary


def _write_table(table, filename):
    """CSV to filename via temp file and rename, or to stdout if filename is None"""
    if filename is None:
        table.write(sys.stdout, format='ascii.csv')
        return
    tmpfilename = filename + '.tmp'
    table.write(tmpfilename, format='ascii.csv', overwrite=True)
    os.replace(tmpfilename, filename)


def summary_filename(filename):
    return filename + '.summary.csv'


def write_benchmark(rows, summary, filename=None):
    """
    Write rows to filename and summary to summary_filename(filename)

    With filename None both go to stdout, the summary block after the rows
    and a "# summary" line.
    """
    _write_table(rows, filename)
    if filename is None:
        sys.stdout.write('# summary\n')
        _write_table(summary, None)
    else:
        _write_table(summary, summary_filename(filename))


def run_benchmark(config, coordinator=None, solutions_dir=None, deterministic=False, loglevel=None):
    """
    Run every benchmark instance of config.

    Options:
        coordinator: mrtapf.mpi coordinator; default is a local process pool
            of worker_count() workers
        solutions_dir: directory to keep solution files of solved rows
        deterministic: zero the wall-clock columns
        loglevel: log print level

    Returns (rows, summary) Tables on the root rank, (None, None) elsewhere
    """
    log = get_logger(loglevel)
    tasks = config.tasks()
    if solutions_dir is not None:
        os.makedirs(solutions_dir, exist_ok=True)

    func = functools.partial(run_instance, config, solutions_dir=solutions_dir,
                             deterministic=deterministic, loglevel=loglevel)

    if coordinator is not None:
        results = coordinator.process(func, tasks)
    else:
        nworkers = min(worker_count(), max(1, len(tasks)))
        log.info(f'Running {len(tasks)} instances on {nworkers} workers')
        if nworkers > 1:
            with ProcessPoolExecutor(max_workers=nworkers) as pool:
                results = NoMPICoordinator(pool.map).process(func, tasks)
        else:
            results = NoMPICoordinator().process(func, tasks)

    if results is None:
        return None, None

    rows = rows_table(results)
    summary = summarize(rows)
    for r in summary:
        log.info(f'n={r["n"]} m={r["m"]}: {r["solved"]}/{r["instances"]} solved, '
                 f'median sa {r["sa_seconds_median"]:.3f}s, median recbs {r["recbs_seconds_median"]:.3f}s')
    return rows, summary
