"""
Reading and writing maps, scenarios, assignments, cost matrices and solutions.

All writes go to a temporary file that is renamed into place so that
outputs are atomic.
"""

import os
import json

import numpy as np
from astropy.table import Table

from mrtapf.util import get_logger
from mrtapf.gridmap import GridMap, Instance, parse_map, render_map
from mrtapf.assign import RoutePlan
from mrtapf.cbs import Path
from mrtapf.recurrent import TimedSolution


def _atomic_write(filename, text):
    """Write text to filename via a temporary file and rename"""
    tmpfilename = filename + '.tmp'
    with open(tmpfilename, 'w') as fx:
        fx.write(text)
    os.replace(tmpfilename, filename)


def read_map(filename):
    """Read a GridMap from a map file"""
    with open(filename) as fx:
        return parse_map(fx.read())


def write_map(filename, gridmap):
    """Write a GridMap to a map file"""
    _atomic_write(filename, render_map(gridmap))


def _cells(values, what):
    try:
        cells = [(int(x), int(y)) for x, y in values]
    except (TypeError, ValueError):
        raise ValueError(f'{what} must be a list of [x, y] pairs')
    return cells


def read_scen(filename, gridmap=None):
    """
    Read an Instance from a scenario file

    Format: {"map": "<path>", "starts": [[x,y],...], "goals": [[x,y],...], "seed": k}
    A relative map path is resolved against the scenario directory.

    Options:
        gridmap: GridMap to use instead of the scenario's map file
    """
    with open(filename) as fx:
        try:
            scen = json.load(fx)
        except json.JSONDecodeError as err:
            raise ValueError(f'{filename}: not valid JSON: {err}')
    if not isinstance(scen, dict):
        raise ValueError(f'{filename}: scenario must be a JSON object')
    for key in ('starts', 'goals'):
        if key not in scen:
            raise ValueError(f'{filename}: missing "{key}"')

    if gridmap is None:
        if 'map' not in scen:
            raise ValueError(f'{filename}: missing "map"')
        mapfile = scen['map']
        if not os.path.isabs(mapfile):
            mapfile = os.path.join(os.path.dirname(os.path.abspath(filename)), mapfile)
        gridmap = read_map(mapfile)

    starts = _cells(scen['starts'], 'starts')
    goals = _cells(scen['goals'], 'goals')
    return Instance(gridmap, starts, goals, seed=int(scen.get('seed', 0)))


def write_scen(filename, instance, mapfile):
    """Write an Instance's robots and goals to a scenario file referencing mapfile"""
    scen = dict(
        map=mapfile,
        starts=[list(c) for c in instance.starts],
        goals=[list(c) for c in instance.goals],
        seed=instance.seed,
    )
    _atomic_write(filename, json.dumps(scen) + '\n')


def write_assignment(filename, plan, cost):
    """Write {"routes": [[goal indices]...], "cost": number}"""
    cost = None if np.isinf(cost) else float(cost)
    _atomic_write(filename, json.dumps(dict(routes=plan.as_lists(), cost=cost)) + '\n')


def read_assignment(filename):
    """Returns (RoutePlan, cost)"""
    with open(filename) as fx:
        data = json.load(fx)
    cost = data.get('cost')
    return RoutePlan(data['routes']), (np.inf if cost is None else cost)


def cost_matrix_table(c):
    """astropy Table of a CostMatrix, one column per vertex label, 'inf' where unreachable"""
    t = Table()
    for j, label in enumerate(c.labels):
        t[label] = ['inf' if np.isinf(v) else str(int(v)) for v in c.values[:, j]]
    return t


def write_cost_matrix(filename, c):
    """CSV dump with header d0..d{N-1},g0..g{M-1}"""
    tmpfilename = filename + '.tmp'
    cost_matrix_table(c).write(tmpfilename, format='ascii.csv', overwrite=True)
    os.replace(tmpfilename, filename)


def solution_dict(solution, plan=None, deterministic=False):
    """
    JSON-ready dict of a TimedSolution

    Options:
        plan: RoutePlan to include as "routes"
        deterministic: zero the wall-clock fields so repeated runs compare equal
    """
    data = dict(
        flowtime=solution.flowtime,
        per_robot_cost=solution.per_robot_cost,
        rounds=solution.rounds,
        paths=[[list(c) for c in p.cells] for p in solution.paths],
        sa_seconds=0.0 if deterministic else round(solution.sa_seconds, 6),
        recbs_seconds=0.0 if deterministic else round(solution.recbs_seconds, 6),
        makespan=solution.makespan,
        per_robot_distance=solution.per_robot_distance,
        arrivals=solution.arrivals,
    )
    if plan is not None:
        data['routes'] = plan.as_lists()
    return data


def write_solution(filename, solution, plan=None, deterministic=False):
    """Write a TimedSolution as JSON; see solution_dict"""
    log = get_logger()
    log.debug(f'Writing {filename}')
    _atomic_write(filename, json.dumps(solution_dict(solution, plan, deterministic)) + '\n')


def read_solution(filename):
    """
    Read a solution file

    Returns (TimedSolution, RoutePlan or None)
    """
    with open(filename) as fx:
        try:
            data = json.load(fx)
        except json.JSONDecodeError as err:
            raise ValueError(f'{filename}: not valid JSON: {err}')
    for key in ('per_robot_cost', 'rounds', 'paths'):
        if key not in data:
            raise ValueError(f'{filename}: missing "{key}"')
    if len(data['paths']) != len(data['per_robot_cost']):
        raise ValueError(f'{filename}: {len(data["paths"])} paths but '
                         f'{len(data["per_robot_cost"])} per_robot_cost entries')

    paths =[Path(_cells(cells, 'paths'), cost=cost)
             for cells, cost in zip(data['paths'], data['per_robot_cost'])]
    solution = TimedSolution(
        paths, data['per_robot_cost'], data['rounds'],
        arrivals=data.get('arrivals'),
        sa_seconds=data.get('sa_seconds', 0.0),
        recbs_seconds=data.get('recbs_seconds', 0.0),
    )
    plan = RoutePlan(data['routes']) if 'routes' in data else None
    return solution, plan
