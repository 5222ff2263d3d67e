import enum
import io
import logging
import math

import numpy as np

from voxcurv.multiscale import MapKind, ScaleMap, VOLUME

logger = logging.getLogger(__name__)

"""
ScaleMap files.

CSV:
    # vox3-map kind=<kind> level=<k> plane=<plane> nx=<..> ny=<..>[ nz=<..>]
    one row per v index (per (w, v) pair of a volume map), nx comma separated values,
    9 decimals, gauss sums in radians.

PGM:
    16 bit binary graymap (P5, big endian samples), one image row per v index.
    value = sample / scale + offset, recorded in the comment line "# scale=<s> offset=<o>".
"""

PGM_MAX = 65535


class MapFormat(enum.Enum):
    CSV = 'csv'
    PGM = 'pgm'

    @staticmethod
    def from_arg(arg):
        for fmt in MapFormat:
            if fmt.value == arg.lower():
                return fmt
        raise ValueError(f'Unknown map format "{arg}", expected csv or pgm')


def _header(scale_map: ScaleMap):
    dims = ' '.join(f'{name}={n}' for name, n in zip(('nx', 'ny', 'nz'), scale_map.shape))
    return f'# vox3-map kind={scale_map.kind.value} level={scale_map.level} plane={scale_map.plane} {dims}'


def _rows(values):
    # first map axis runs along a row
    if values.ndim == 2:
        return values.T
    return values.transpose(2, 1, 0).reshape(-1, values.shape[0])


def format_csv(scale_map: ScaleMap):
    buffer = io.StringIO()
    buffer.write(_header(scale_map) + '\n')
    # + 0.0 turns -0.0 into 0.0
    np.savetxt(buffer, _rows(scale_map.values) + 0.0, fmt='%.9f', delimiter=',')
    return buffer.getvalue()


def parse_csv(text):
    """
    Reads a map written by format_csv. Gauss sums are rounded back to pi/2 units.
    """
    lines = text.splitlines()
    if not lines or not lines[0].startswith('# vox3-map '):
        raise ValueError('Missing "# vox3-map" header line')
    fields = dict(token.split('=', 1) for token in lines[0][len('# vox3-map '):].split())
    try:
        kind = MapKind(fields['kind'])
        level = int(fields['level'])
        plane = fields['plane']
        shape = tuple(int(fields[name]) for name in ('nx', 'ny', 'nz') if name in fields)
    except (KeyError, ValueError) as e:
        raise ValueError(f'Malformed map header "{lines[0]}": {e}')

    rows = np.loadtxt(io.StringIO('\n'.join(lines[1:])), delimiter=',', ndmin=2)
    if len(shape) == 2:
        values = rows.T
    else:
        values = rows.reshape(shape[2], shape[1], shape[0]).transpose(2, 1, 0)
    if values.shape != shape:
        raise ValueError(f'Map body has shape {values.shape}, header says {shape}')
    if kind == MapKind.GAUSS_SUM:
        values = np.rint(values / (math.pi / 2)).astype(np.int64)
    return ScaleMap(level, plane, kind, values)


def format_pgm(scale_map: ScaleMap):
    """
    Affine rescale of the values to [0, 65535]. A constant map gets scale 1.
    """
    if scale_map.plane == VOLUME:
        raise ValueError('PGM output needs a 2D map, use csv for volume maps')
    values = _rows(scale_map.values).astype(np.float64)
    offset = float(values.min())
    spread = float(values.max()) - offset
    scale = PGM_MAX / spread if spread > 0 else 1.0
    samples = np.rint((values - offset) * scale).clip(0, PGM_MAX).astype('>u2')

    height, width = samples.shape
    header = f'P5\n# scale={scale:.9g} offset={offset:.9g}\n{width} {height}\n{PGM_MAX}\n'
    return header.encode('ascii') + samples.tobytes()


def write_map(scale_map: ScaleMap, path, fmt=MapFormat.CSV):
    if fmt == MapFormat.CSV:
        with open(path, 'w', newline='\n') as writer:
            writer.write(format_csv(scale_map))
    elif fmt == MapFormat.PGM:
        with open(path, 'wb') as writer:
            writer.write(format_pgm(scale_map))
    else:
        raise NotImplementedError(f'Format {fmt} not implemented')
    logger.debug(f'Wrote {scale_map!r} to {path}')
