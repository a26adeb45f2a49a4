"""
Command line interface: gen, solve, bench and validate subcommands.

Exit codes: 0 success, 1 input/config/I/O error, 2 infeasible instance,
search limit, time limit or failed validation.
"""

import os
import argparse

from mrtapf.util import get_logger, Timer
from mrtapf.gridmap import generate_instance
from mrtapf.assign import SAParams
from mrtapf.io import (read_map, write_map, read_scen, write_scen, write_assignment,
                       write_cost_matrix, write_solution, read_solution)
from mrtapf.core import solve_instance
from mrtapf.validate import validate
from mrtapf.bench import SOLVER_FAILURES, BenchConfig, run_benchmark, write_benchmark
from mrtapf.mpi import SerialCoordinator

__all__ = ["parse", "main"]

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FAILED = 2


def parse(options=None):
    parser = argparse.ArgumentParser(description="Multi-robot task assignment and path finding.",
                                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    subparsers = parser.add_subparsers(dest='command', required=True)

    def add_parser(name, help):
        p = subparsers.add_parser(name, help=help,
                                  formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        p.add_argument("--loglevel", default='info', help='log print level (debug,info,warn,error)')
        return p

    p = add_parser('gen', 'generate a random instance')
    p.add_argument("--width", type=int, default=32, help="map width")
    p.add_argument("--height", type=int, default=32, help="map height")
    p.add_argument("--obstacles", type=float, default=0.4, help="fraction of blocked cells")
    p.add_argument("--robots", type=int, required=True, help="number of robots")
    p.add_argument("--goals", type=int, required=True, help="number of goals")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("-o", "--out", type=str, required=True,
                   help="output scenario file; the map is written next to it as <name>.map")

    p = add_parser('solve', 'assign goals and plan conflict-free paths')
    p.add_argument("--map", type=str, required=True, help="input map file")
    p.add_argument("--scen", type=str, required=True, help="input scenario file")
    p.add_argument("--t-initial", type=float, default=0.1, help="initial acceptance threshold")
    p.add_argument("--max-iter", type=int, default=20000, help="simulated annealing iterations")
    p.add_argument("--node-limit", type=int, default=100000, help="CBS constraint tree node limit per round")
    p.add_argument("--time-limit", type=float, default=60.0, help="wall-clock limit in seconds")
    p.add_argument("--seed", type=int, default=0, help="simulated annealing seed")
    p.add_argument("-o", "--out", type=str, required=True, help="output solution file")
    p.add_argument("--assignment", type=str, default=None, help="output assignment file")
    p.add_argument("--cost-matrix", type=str, default=None, help="output cost matrix CSV")
    p.add_argument("--deterministic", action="store_true",
                   help="write zero wall-clock times so repeated runs are byte-identical")

    p = add_parser('bench', 'run the benchmark protocol')
    p.add_argument("--config", type=str, required=True, help="benchmark config JSON")
    p.add_argument("-o", "--out", type=str, default=None,
                   help="output CSV rows (default stdout); summary goes to <out>.summary.csv")
    p.add_argument("--solutions", type=str, default=None,
                   help="directory to keep the solution of every solved instance")
    p.add_argument("--deterministic", action="store_true", help="write zero wall-clock times")
    p.add_argument("--mpi", action="store_true", help="Use MPI for parallelism")

    p = add_parser('validate', 'check a solution file')
    p.add_argument("--map", type=str, required=True, help="input map file")
    p.add_argument("--scen", type=str, required=True, help="input scenario file")
    p.add_argument("--solution", type=str, required=True, help="input solution file")

    args = None
    if options is None:
        args = parser.parse_args()
    else:
        args = parser.parse_args(options)
    return args


def _read_instance(args):
    return read_scen(args.scen, gridmap=read_map(args.map))


def cmd_gen(args):
    log = get_logger(args.loglevel)
    instance = generate_instance(args.width, args.height, args.obstacles,
                                 args.robots, args.goals, args.seed)
    mapfile = os.path.splitext(args.out)[0] + '.map'
    write_map(mapfile, instance.map)
    write_scen(args.out, instance, os.path.basename(mapfile))
    log.info(f'Wrote {mapfile} and {args.out}')
    return EXIT_OK


def cmd_solve(args):
    log = get_logger(args.loglevel)
    timer = Timer()
    instance = _read_instance(args)
    sa_params = SAParams(args.t_initial, args.max_iter, seed=args.seed)
    timer.split('load')

    result = solve_instance(instance, sa_params=sa_params, node_limit=args.node_limit,
                            time_limit=args.time_limit, loglevel=args.loglevel)
    timer.split('solve')

    if args.cost_matrix is not None:
        log.info(f'Writing {args.cost_matrix}')
        write_cost_matrix(args.cost_matrix, result['cost_matrix'])
    if args.assignment is not None:
        log.info(f'Writing {args.assignment}')
        write_assignment(args.assignment, result['plan'], result['sa_cost'])

    report = result['report']
    if not report.ok:
        log.error(report.to_text())
        return EXIT_FAILED

    log.info(f'Writing {args.out}')
    write_solution(args.out, result['solution'], plan=result['plan'],
                   deterministic=args.deterministic)
    timer.split('write')
    timer.log_splits(log)
    return EXIT_OK


def cmd_validate(args):
    log = get_logger(args.loglevel)
    instance = _read_instance(args)
    solution, plan = read_solution(args.solution)
    if plan is None:
        raise ValueError(f'{args.solution}: missing "routes"')
    report = validate(instance, solution, plan)
    if report.ok:
        log.info(report.to_text())
        return EXIT_OK
    log.error(report.to_text())
    return EXIT_FAILED


def cmd_bench(args, comm=None):
    log = get_logger(args.loglevel)
    timer = Timer()

    #- Load MPI only if requested
    coordinator = None
    if comm is not None or args.mpi:
        if comm is None:
            from mpi4py import MPI
            comm = MPI.COMM_WORLD
        coordinator = SerialCoordinator(comm)
        config = coordinator.read(lambda: BenchConfig.read(args.config))
    else:
        config = BenchConfig.read(args.config)
    log.info(f'{config}')
    timer.split('init')

    rows, summary = run_benchmark(config, coordinator=coordinator, solutions_dir=args.solutions,
                                  deterministic=args.deterministic, loglevel=args.loglevel)
    timer.split('run')

    #- Write output
    def write(payload):
        if args.out is not None:
            log.info(f'Writing {args.out}')
        write_benchmark(*payload, args.out)

    if coordinator is not None:
        coordinator.write(write, (rows, summary))
    else:
        write((rows, summary))

    timer.split('write')
    if coordinator is None or coordinator.is_root(coordinator.rank):
        timer.log_splits(log)
    return EXIT_OK


COMMANDS = dict(gen=cmd_gen, solve=cmd_solve, bench=cmd_bench, validate=cmd_validate)


def main(options=None):
    """
    Run a subcommand.

    Args:
        options: list of command line arguments, default sys.argv[1:]

    Returns exit code
    """
    args = parse(options)
    log = get_logger(args.loglevel)
    try:
        return COMMANDS[args.command](args)
    except SOLVER_FAILURES as err:
        log.error(f'{type(err).__name__}: {err}')
        return EXIT_FAILED
    except (OSError, ValueError) as err:
        log.error(f'{type(err).__name__}: {err}')
        return EXIT_INPUT
