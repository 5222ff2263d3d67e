import argparse
import logging
import time

import numpy as np

from voxcurv import logging_default as log
from voxcurv.multiscale import MapKind, ScaleMap, pyramid

logger = logging.getLogger(__name__)

"""
Times full pyramid construction over square gauss_sum base maps and checks that the time per
cell stays within a factor of the fitted slope, i.e. construction grows linearly in the cell count.

Usage:
    pyramid_timing.py [--sizes 64 128 256] [--repeats 50] [--seed 0]
"""


def time_pyramid(size, repeats, rng):
    cells = rng.integers(-2, 2, size=(size, size), dtype=np.int64)
    base = ScaleMap(0, 'xy', MapKind.GAUSS_SUM, cells)
    levels = int(np.log2(size)) + 1

    best = float('inf')
    for _ in range(repeats):
        start = time.perf_counter()
        maps = pyramid(base, levels)
        best = min(best, time.perf_counter() - start)
        assert maps[-1].exact_total() == base.exact_total()
    return best


def main(args):
    rng = np.random.default_rng(args.seed)
    cell_counts = np.array([size * size for size in args.sizes], dtype=np.float64)
    seconds = np.array([time_pyramid(size, args.repeats, rng) for size in args.sizes])

    slope, intercept = np.polyfit(cell_counts, seconds, 1)
    for n, t in zip(cell_counts, seconds):
        logger.info(f'{int(n)} cells: {t * 1e3:.3f} ms')
        print(f'{int(n):>8} cells  {t * 1e3:9.3f} ms  {t / n * 1e9:8.2f} ns/cell')

    # marginal cost between consecutive sizes against the fitted slope
    marginal = np.diff(seconds) / np.diff(cell_counts)
    linear = slope > 0 and bool(np.all((marginal >= slope / 2) & (marginal <= 2 * slope)))

    print(f'fitted slope {slope * 1e9:.2f} ns/cell, intercept {intercept * 1e3:.3f} ms')
    print('linear' if linear else 'NOT linear within a factor of 2 of the fitted slope')
    return linear


if __name__ == '__main__':
    parser = argparse.ArgumentParser()
    parser.add_argument('--sizes', type=int, nargs='+', default=[64, 128, 256])
    parser.add_argument('--repeats', type=int, default=50)
    parser.add_argument('--seed', type=int, default=0)
    args = parser.parse_args()

    # setup logging
    log.configure()

    raise SystemExit(0 if main(args) else 1)
