import logging
import struct

import numpy as np

from voxcurv.voxgrid import VoxelFormat, VoxelGrid

logger = logging.getLogger(__name__)

"""
Two interchangeable encodings of a VoxelGrid. Cells are always serialized with x varying
fastest, then y, then z.

Text ("vox3 text"):
    vox3 <nx> <ny> <nz>\\n
    nz slice blocks of ny lines, each line nx characters of '0'/'1' and a LF.
    Blank lines between slice blocks are accepted on read and never written.

Raw ("vox3 raw"):
    Byte    0-3     4-7     8-11    12-15
            'VX3\\0' nx      ny      nz        (unsigned 32 bit little endian)
    followed by ceil(nx*ny*nz / 8) payload bytes, cell i is bit i % 8 (LSB first) of byte i // 8.
    Pad bits of the last byte must be zero.
"""

TEXT_MAGIC = b'vox3 '
RAW_MAGIC = b'VX3\x00'
RAW_HEADER = struct.Struct('<4sIII')


class VoxFormatError(ValueError):
    """
    Malformed voxel stream. `offset` is the byte offset at which the problem was detected.
    """
    def __init__(self, message, offset):
        super().__init__(f'{message} (at byte {offset})')
        self.offset = offset


def _read_all(source):
    if hasattr(source, 'read'):
        return source.read()
    return bytes(source)


def detect_format(data):
    """
    :param data: at least the first bytes of a stream
    :returns VoxelFormat matching the magic bytes
    """
    if data.startswith(RAW_MAGIC):
        return VoxelFormat.RAW
    if data.startswith(TEXT_MAGIC):
        return VoxelFormat.TEXT
    raise VoxFormatError('Unknown voxel format, expected "vox3 " text header or VX3 raw magic', 0)


def _parse_dimension(token, offset):
    if not token or not token.isdigit():
        raise VoxFormatError(f'Malformed dimension {token!r} in header', offset)
    value = int(token)
    if value < 1:
        raise VoxFormatError(f'Dimension must be >= 1, got {value}', offset)
    return value


def _load_text(data):
    end_of_header = data.find(b'\n')
    if end_of_header < 0:
        raise VoxFormatError('Header line is not terminated', len(data))

    tokens = data[:end_of_header].split(b' ')
    if len(tokens) != 4 or tokens[0] != b'vox3':
        raise VoxFormatError('Malformed header, expected "vox3 <nx> <ny> <nz>"', 0)

    dims = []
    offset = len(tokens[0]) + 1
    for token in tokens[1:]:
        dims.append(_parse_dimension(token, offset))
        offset += len(token) + 1
    nx, ny, nz = dims

    expected_rows = ny * nz
    rows = []
    pos = end_of_header + 1
    while pos < len(data):
        end = data.find(b'\n', pos)
        if end < 0:
            raise VoxFormatError('Row is not terminated by LF', pos)
        line = data[pos:end]

        if not line:
            # blank lines only separate slice blocks
            if len(rows) == 0 or len(rows) == expected_rows:
                raise VoxFormatError('Blank line outside the slice blocks', pos)
            if len(rows) % ny != 0:
                raise VoxFormatError(f'Blank line inside slice block {len(rows) // ny}', pos)
            pos = end + 1
            continue

        if len(rows) == expected_rows:
            raise VoxFormatError(f'Payload has more than {expected_rows} rows', pos)
        if len(line) != nx:
            raise VoxFormatError(f'Row has {len(line)} cells, expected {nx}', pos)
        illegal = line.strip(b'01')
        if illegal:
            index = next(i for i, c in enumerate(line) if c not in b'01')
            raise VoxFormatError(f'Illegal character {line[index:index + 1]!r}', pos + index)

        rows.append(line)
        pos = end + 1

    if len(rows) != expected_rows:
        raise VoxFormatError(f'Payload has {len(rows)} rows, expected {expected_rows}', len(data))

    bits = np.frombuffer(b''.join(rows), dtype=np.uint8) == ord('1')
    return VoxelGrid.from_serial_bits(bits, nx, ny, nz)


def _save_text(grid):
    # (z, y, x) so that a C-order dump runs x fastest
    cells = np.where(grid.occupancy.transpose(2, 1, 0), ord('1'), ord('0')).astype(np.uint8)
    newline = np.full(cells.shape[:2] + (1,), ord('\n'), dtype=np.uint8)
    body = np.concatenate((cells, newline), axis=2).tobytes()
    return f'vox3 {grid.nx} {grid.ny} {grid.nz}\n'.encode('ascii') + body


def _load_raw(data):
    if len(data) < RAW_HEADER.size:
        raise VoxFormatError(f'Raw header needs {RAW_HEADER.size} bytes', len(data))
    magic, nx, ny, nz = RAW_HEADER.unpack_from(data)
    if magic != RAW_MAGIC:
        raise VoxFormatError('Raw stream must start with VX3 magic', 0)
    for i, value in enumerate((nx, ny, nz)):
        if value < 1:
            raise VoxFormatError(f'Dimension must be >= 1, got {value}', 4 + 4 * i)

    cell_count = nx * ny * nz
    expected = (cell_count + 7) // 8
    payload = data[RAW_HEADER.size:]
    if len(payload) < expected:
        raise VoxFormatError(f'Payload has {len(payload)} bytes, expected {expected}', len(data))
    if len(payload) > expected:
        raise VoxFormatError(f'Payload has {len(payload) - expected} trailing bytes', RAW_HEADER.size + expected)

    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), bitorder='little')
    if bits[cell_count:].any():
        raise VoxFormatError('Pad bits of the last payload byte must be zero', len(data) - 1)
    return VoxelGrid.from_serial_bits(bits[:cell_count], nx, ny, nz)


def _save_raw(grid):
    header = RAW_HEADER.pack(RAW_MAGIC, grid.nx, grid.ny, grid.nz)
    # packbits zero fills the pad bits
    payload = np.packbits(grid.serial_bits(), bitorder='little')
    return header + payload.tobytes()


def load_grid(source, fmt=None):
    """
    Decodes a voxel stream.

    :param source: bytes or a binary file like object
    :param fmt: VoxelFormat, None to detect it from the magic bytes
    :returns VoxelGrid
    """
    data = _read_all(source)
    if fmt is None:
        fmt = detect_format(data)
    if fmt == VoxelFormat.TEXT:
        grid = _load_text(data)
    elif fmt == VoxelFormat.RAW:
        grid = _load_raw(data)
    else:
        raise NotImplementedError(f'Format {fmt} not implemented')
    logger.debug(f'Loaded {grid!r} from {len(data)} {fmt.value} bytes')
    return grid


def save_grid(grid: VoxelGrid, fmt=VoxelFormat.TEXT):
    """
    :returns encoded bytes of the grid
    """
    if fmt == VoxelFormat.TEXT:
        return _save_text(grid)
    elif fmt == VoxelFormat.RAW:
        return _save_raw(grid)
    else:
        raise NotImplementedError(f'Format {fmt} not implemented')


def read_grid(path, fmt=None):
    with open(path, 'rb') as reader:
        return load_grid(reader, fmt)


def write_grid(grid: VoxelGrid, path, fmt=VoxelFormat.TEXT):
    with open(path, 'wb') as writer:
        writer.write(save_grid(grid, fmt))
