import logging
import os
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

logger = logging.getLogger(__name__)

THREADS_ENV = 'VOXCURV_THREADS'


@contextmanager
def get_output(path=None, open_flags='w', default=None):
    """
    Context manager that opens the file if a path was given, otherwise returns default value.
    """
    if path is not None:
        file = open(path, open_flags)
        try:
            yield file
        finally:
            file.close()
    else:
        yield default


def get_bit(value, n):
    return (value >> n & 1) != 0


def resolve_threads(threads=None):
    """
    Worker count for parallel sections.
    :param threads: explicit count (e.g. from --threads), None to fall back to the
                    VOXCURV_THREADS environment variable and then to the number of cores
    :returns positive integer
    """
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ValueError(f'{THREADS_ENV} must be an integer, got "{env}"')
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise ValueError(f'Thread count must be >= 1, got {threads}')
    return threads


def chunk_bounds(length, parts):
    """
    Splits range(length) into at most `parts` contiguous (start, stop) pairs.
    """
    parts = max(1, min(parts, length))
    step, extra = divmod(length, parts)
    bounds = []
    start = 0
    for i in range(parts):
        stop = start + step + (1 if i < extra else 0)
        bounds.append((start, stop))
        start = stop
    return bounds


def parallel_map(func, items, threads=1):
    """
    Order preserving map, run on a thread pool when more than one thread is requested.
    numpy releases the GIL for the array work handed to this.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    logger.debug(f'Mapping {len(items)} items on {threads} threads')
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, items))
