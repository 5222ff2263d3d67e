import logging

import numpy as np

from voxcurv.voxgrid import VoxelGrid

logger = logging.getLogger(__name__)


class ShapeSpecError(ValueError):
    pass


# name -> (parameter names, defaults of the optional trailing parameters)
SHAPES = {
    'cube': (('a',), ()),
    'box': (('a', 'b', 'c'), ()),
    'sphere': (('r',), ()),
    'torus': (('R', 'r_tube'), ()),
    'blob': (('seed', 'steps', 'size'), (16,)),
    'bump_plate': (('w', 'h', 'bump_r'), ()),
    'holed_plate': (('holes',), ()),
}


class ShapeSpec:
    """
    A named fixture shape with integer parameters, e.g. ShapeSpec('torus', 4, 1).
    Textual form used by the CLI: "torus:4,1".
    """
    def __init__(self, kind, *params):
        if kind not in SHAPES:
            raise ShapeSpecError(f'Unknown shape "{kind}", expected one of {", ".join(SHAPES)}.')
        names, defaults = SHAPES[kind]
        required = len(names) - len(defaults)
        if not required <= len(params) <= len(names):
            raise ShapeSpecError(f'Shape "{kind}" takes parameters ({", ".join(names)}), got {len(params)}.')
        params = tuple(params) + tuple(defaults[len(params) - required:])
        try:
            params = tuple(int(p) for p in params)
        except (TypeError, ValueError):
            raise ShapeSpecError(f'Shape parameters must be integers, got {params}.')

        self.kind = kind
        self.params = params

    @staticmethod
    def from_arg(arg):
        kind, _, rest = arg.partition(':')
        params = [p.strip() for p in rest.split(',')] if rest else []
        return ShapeSpec(kind.strip(), *params)

    def __eq__(self, other):
        if not isinstance(other, ShapeSpec):
            return NotImplemented
        return (self.kind, self.params) == (other.kind, other.params)

    def __hash__(self):
        return hash((self.kind, self.params))

    def __str__(self):
        return f'{self.kind}:{",".join(str(p) for p in self.params)}'


def _require(condition, message):
    if not condition:
        raise ShapeSpecError(message)


def _centered(n, center):
    return np.arange(n) - center


def _cube(a):
    _require(a >= 1, 'Cube side must be >= 1.')
    return np.ones((a, a, a), dtype=bool)


def _box(a, b, c):
    _require(min(a, b, c) >= 1, 'Box sides must be >= 1.')
    return np.ones((a, b, c), dtype=bool)


def _sphere(r):
    """
    Cells whose centers lie within distance r of the grid center. The grid has 2r+1 cells per
    axis, so the center is the center of cell (r, r, r) and the result has all 48 symmetries.
    """
    _require(r >= 1, 'Sphere radius must be >= 1.')
    u = _centered(2 * r + 1, r)
    x, y, z = np.meshgrid(u, u, u, indexing='ij')
    return x * x + y * y + z * z <= r * r


def _torus(big_r, r_tube):
    """
    Solid torus around the circle of radius R in the plane through the center of the middle z layer.
    """
    _require(r_tube >= 1, 'Torus tube radius must be >= 1.')
    _require(big_r > r_tube, 'Torus needs R > r_tube.')
    n = 2 * (big_r + r_tube) + 1
    u = _centered(n, big_r + r_tube)
    w = _centered(2 * r_tube + 1, r_tube)
    x, y, z = np.meshgrid(u, u, w, indexing='ij')
    rho = np.sqrt(x * x + y * y)
    return (rho - big_r) ** 2 + z * z <= r_tube * r_tube


def _blob(seed, steps, size):
    """
    Seeded union of random boxes. Every box contains the center cell, which keeps the union
    6-connected, free of edge or vertex-only contacts and of genus 0.
    """
    _require(steps >= 1, 'Blob needs at least one step.')
    _require(size >= 3, 'Blob grid size must be >= 3.')
    rng = np.random.default_rng(seed)
    occupancy = np.zeros((size, size, size), dtype=bool)
    center = size // 2
    reach = max(1, size // 2)
    for _ in range(steps):
        lo = center - rng.integers(0, reach, size=3)
        hi = center + rng.integers(0, reach, size=3)
        lo = np.clip(lo, 0, size - 1)
        hi = np.clip(hi, 0, size - 1)
        occupancy[lo[0]:hi[0] + 1, lo[1]:hi[1] + 1, lo[2]:hi[2] + 1] = True
    return occupancy


def _bump_plate(w, h, bump_r):
    """
    Flat w x w slab of thickness h with a half ball of radius bump_r on top. The ball is centered
    in the top slab layer at (w // 2, w // 2).
    """
    _require(h >= 1 and bump_r >= 1, 'Plate thickness and bump radius must be >= 1.')
    _require(w >= 2 * bump_r + 3, f'Plate width must be >= {2 * bump_r + 3} to hold the bump.')
    nz = h + bump_r
    occupancy = np.zeros((w, w, nz), dtype=bool)
    occupancy[:, :, :h] = True

    c = w // 2
    u = _centered(w, c)
    dz = np.arange(nz) - (h - 1)
    x, y, z = np.meshgrid(u, u, dz, indexing='ij')
    occupancy |= (x * x + y * y + z * z <= bump_r * bump_r)
    return occupancy


def _holed_plate(holes):
    """
    Slab of thickness 2 with single cell through holes every 4 cells along x, genus = holes.
    """
    _require(holes >= 1, 'Holed plate needs at least one hole.')
    occupancy = np.ones((4 * holes + 1, 5, 2), dtype=bool)
    for i in range(holes):
        occupancy[2 + 4 * i, 2, :] = False
    return occupancy


_GENERATORS = {
    'cube': _cube,
    'box': _box,
    'sphere': _sphere,
    'torus': _torus,
    'blob': _blob,
    'bump_plate': _bump_plate,
    'holed_plate': _holed_plate,
}


def bump_footprint(w, h, bump_r):
    """
    :returns (center_x, center_y, radius) of the bump disk in vertex coordinates of a bump_plate
    """
    c = w // 2
    # the center cell spans vertex coordinates c .. c+1
    return c + 0.5, c + 0.5, bump_r + 1.0


def generate_shape(spec):
    """
    Deterministic fixture volumes: equal specs give bit identical grids.

    :param spec: ShapeSpec or its textual form ("cube:3", "torus:4,1", ...)
    :returns VoxelGrid
    """
    if isinstance(spec, str):
        spec = ShapeSpec.from_arg(spec)
    occupancy = _GENERATORS[spec.kind](*spec.params)
    grid = VoxelGrid(occupancy)
    logger.debug(f'Generated {spec} as {grid!r}')
    return grid
