"""
General utility non-I/O code for mrtapf.
"""

import time, datetime

import os, logging

import numpy as np

#- subset of desiutil.log.get_logger, without the desiutil dependency
_loggers = dict()

_levels = dict(
    DEBUG=logging.DEBUG,
    INFO=logging.INFO,
    WARN=logging.WARNING,
    WARNING=logging.WARNING,
    ERROR=logging.ERROR,
    FATAL=logging.CRITICAL,
    CRITICAL=logging.CRITICAL,
)


def get_logger(level=None):
    """Returns a cached logger for the requested level.

    The level defaults to $MRTAPF_LOGLEVEL, or INFO if that is unset.
    WARN and FATAL are accepted as aliases of WARNING and CRITICAL.
    """
    if level is None:
        level = os.getenv('MRTAPF_LOGLEVEL', 'INFO')

    level = level.upper()
    if level not in _levels:
        raise ValueError(f'Unknown log level {level}; should be DEBUG/INFO/WARNING/ERROR/CRITICAL')
    loglevel = _levels[level]
    name = logging.getLevelName(loglevel)

    if name not in _loggers:
        logger = logging.getLogger('mrtapf.'+name)
        logger.setLevel(loglevel)
        logger.propagate = False

        #- one stream handler per level; messages go to stderr
        ch = logging.StreamHandler()
        ch.setLevel(loglevel)
        ch.setFormatter(logging.Formatter('%(levelname)s:%(filename)s:%(lineno)s:%(funcName)s:%(message)s'))
        logger.addHandler(ch)

        _loggers[name] = logger

    return _loggers[name]


class TimeLimitExceeded(RuntimeError):
    """Raised when a cooperative wall-clock deadline has passed."""
    pass


class Deadline(object):
    def __init__(self, seconds):
        """A cooperative wall-clock limit starting now.

        Args:
            seconds: allowed wall-clock seconds; None means no limit
        """
        self.seconds = seconds
        self.start = time.perf_counter()

    def remaining(self):
        """Seconds left before the deadline (inf without a limit)."""
        if self.seconds is None:
            return float('inf')
        return self.seconds - (time.perf_counter() - self.start)

    def expired(self):
        return self.remaining() <= 0

    def check(self, where=''):
        """Raise TimeLimitExceeded if the deadline has passed."""
        if self.expired():
            msg = 'time limit of {}s exceeded'.format(self.seconds)
            if where:
                msg += ' during ' + where
            raise TimeLimitExceeded(msg)


def check_deadline(deadline, where=''):
    """Checks deadline if one was provided."""
    if deadline is not None:
        deadline.check(where)


def worker_count(default=None):
    """Number of local worker processes, capped by $MRTAPF_THREADS."""
    if default is None:
        default = os.cpu_count() or 1
    value = os.getenv('MRTAPF_THREADS')
    if value is None or value.strip() == '':
        return max(1, default)
    try:
        nthreads = int(value)
    except ValueError:
        raise ValueError(f'MRTAPF_THREADS must be an integer, got {value!r}')
    if nthreads < 1:
        raise ValueError(f'MRTAPF_THREADS must be >= 1, got {nthreads}')
    return min(nthreads, max(1, default))


def quartiles(values):
    """Returns (min, q1, median, q3, max) of values; NaNs if values is empty."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return (np.nan,) * 5
    return tuple(float(q) for q in np.percentile(values, [0, 25, 50, 75, 100]))


class Timer(object):
    def __init__(self):
        """A helper class for capturing timing splits.

        The start time is set on instantiation.
        """
        self.start = self.time()
        self.splits = list()
        self._max_name_length = 5

    def split(self, name):
        """Capture timing split since start or previous split.

        Args:
            name: name to use for the captured interval
        """
        split = (name, self.time())
        self._max_name_length = max(len(name), self._max_name_length)
        self.splits.append(split)

    def time(self):
        """Returns the number of seconds since start of unix epoch.
        """
        return time.time()

    def elapsed(self, name):
        """Returns the duration of the named split in seconds.

        Args:
            name: name of a previously captured split
        """
        last = self.start
        for split_name, t in self.splits:
            if split_name == name:
                return t - last
            last = t
        raise KeyError(f'no timing split named {name!r}')

    def total(self):
        """Seconds between start and the most recent split."""
        if len(self.splits) == 0:
            return 0.0
        return self.splits[-1][1] - self.start

    def _gen_split_summary(self):
        """Split summary generator.
        """
        start_iso = datetime.datetime.utcfromtimestamp(self.start).isoformat()
        yield '{name:>{n}s}:{time}'.format(name='start', time=start_iso, n=self._max_name_length)
        last = self.start
        fmt = '{name:>{n}s}:{delta:>22.2f}'
        for name, time in self.splits:
            delta = time - last
            yield fmt.format(name=name, delta=delta, n=self._max_name_length)
            last = time
        yield fmt.format(name='total', delta=last-self.start, n=self._max_name_length)

    def log_splits(self, log):
        """Logs the timer's split summary as INFO

        Args:
            log: a logger object
        """
        for line in self._gen_split_summary():
            log.info(line)
