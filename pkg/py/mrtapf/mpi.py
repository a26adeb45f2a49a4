"""This module provides helper classes for distributing benchmark instances when using MPI.

Every rank reads the same configuration, processes its share of the
instances (tasks[rank::size]) and the root rank writes the gathered results.

Example usage:

# no mpi
mrtapf bench --config benchmarks/protocol.json --out bench.csv

# mpi
mpirun -n 4 mrtapf bench --mpi --config benchmarks/protocol.json --out bench.csv
"""

from abc import ABC, abstractmethod


class AbstractCoordinator(ABC):
    """Abstract base class for coordinating read/process/write steps of a benchmark."""
    _root = 0

    @classmethod
    def is_root(cls, rank):
        return rank == cls._root

    @abstractmethod
    def read(self, func):
        """Read input via func() and share it with all ranks."""
        raise NotImplementedError()

    @abstractmethod
    def process(self, func, tasks):
        """Apply func to this rank's share of tasks; return all results on root."""
        raise NotImplementedError()

    @abstractmethod
    def write(self, func, payload):
        """Writes output by calling func(payload) on root."""
        raise NotImplementedError()


class NoMPICoordinator(AbstractCoordinator):

    def __init__(self, mapper=map):
        """A NoMPICoordinator coordinates read/process/write steps when run without MPI.

        Args:
            mapper: map-like callable used to process tasks, e.g. the map method
                of a concurrent.futures executor
        """
        self.comm = None
        self.rank = 0
        self.size = 1
        self.mapper = mapper

    def read(self, func):
        """Returns the result of func()."""
        return func()

    def process(self, func, tasks):
        """Returns [func(task) for task in tasks] in task order."""
        return list(self.mapper(func, tasks))

    def write(self, func, payload):
        """Returns the result of func(payload)."""
        return func(payload)


class SerialCoordinator(AbstractCoordinator):

    def __init__(self, comm):
        """A SerialCoordinator coordinates read/process/write steps using MPI.
        Input is read on the root rank and broadcast. All ranks process a strided
        share of the tasks. The root rank gathers the results and writes output.

        Args:
            comm: an MPI communicator.
        """
        self.comm = comm
        self.rank = comm.rank
        self.size = comm.size

    def read(self, func):
        """Reads input via func() on root and broadcasts the result to every rank.

        Args:
            func: a callable with no arguments.

        Returns:
            result: the result of func() on every rank.
        """
        if SerialCoordinator.is_root(self.rank):
            result = func()
        else:
            result = None
        return self.comm.bcast(result, root=SerialCoordinator._root)

    def process(self, func, tasks):
        """Applies func to tasks[rank::size] and gathers the results to root.

        Args:
            func: a callable taking one task.
            tasks: the full list of tasks, identical on every rank.

        Returns:
            results: on root, the results in task order. None on other ranks.
        """
        tasks = list(tasks)
        mine = [func(task) for task in tasks[self.rank::self.size]]
        gathered = self.comm.gather(mine, root=SerialCoordinator._root)
        if not SerialCoordinator.is_root(self.rank):
            return None
        results = [None] * len(tasks)
        for rank, rankresults in enumerate(gathered):
            results[rank::self.size] = rankresults
        return results

    def write(self, func, payload):
        """Writes output by calling func(payload) from the root rank.

        Returns:
            result: the result of func(payload) on root, None elsewhere.
        """
        if SerialCoordinator.is_root(self.rank):
            return func(payload)
        return None
