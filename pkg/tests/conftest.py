import logging

import pytest

from voxcurv.shapes import generate_shape
from voxcurv.vox_file import write_grid
from voxcurv.voxgrid import VoxelFormat

# published curvature ratio vectors of six objects
PUBLISHED_VECTORS = {
    'e1': (0.288267, 0.592615, 0.107207, 0.016677),
    'e2': (0.262424, 0.508752, 0.193369, 0.044133),
    'e3': (0.168149, 0.680220, 0.144854, 0.008895),
    'e4': (0.152833, 0.711492, 0.122506, 0.013966),
    'e5': (0.148500, 0.710425, 0.135432, 0.007128),
    'e6': (0.162700, 0.688310, 0.140705, 0.010093),
}

# lower triangle of the published squared distance matrix, row i holds columns 1 .. i-1
PUBLISHED_MATRIX = {
    (2, 1): 0.015878586,
    (3, 1): 0.023580826, (3, 2): 0.041884473,
    (4, 1): 0.032715518, (4, 2): 0.059045308, (4, 3): 0.001737666,
    (5, 1): 0.034301844, (5, 2): 0.058376743, (5, 3): 0.001390322, (5, 4): 0.000233753,
    (6, 1): 0.02609007, (6, 2): 0.04611817, (6, 3): 0.000113789, (6, 4): 0.000980967, (6, 5): 0.000727309,
}

# (spec, genus) of the closed manifold fixtures
MANIFOLD_FIXTURES = [
    ('cube:1', 0),
    ('cube:3', 0),
    ('box:2,3,5', 0),
    ('sphere:2', 0),
    ('sphere:4', 0),
    ('torus:4,1', 1),
    ('torus:6,1', 1),
    ('holed_plate:1', 1),
    ('holed_plate:2', 2),
    ('holed_plate:3', 3),
    ('blob:7,20', 0),
    ('bump_plate:16,2,4', 0),
]


@pytest.fixture
def write_fixture(tmp_path):
    """
    Writes a generated shape to a file and returns its path.
    """
    def write(spec, name=None, fmt=VoxelFormat.TEXT):
        path = tmp_path / (name or spec.replace(':', '_').replace(',', '_') + '.vox')
        write_grid(generate_shape(spec), path, fmt)
        return path
    return write


@pytest.fixture(autouse=True)
def drop_console_handlers():
    """
    The CLI installs handlers bound to the captured streams of one test, remove them afterwards.
    """
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, '_voxcurv', False):
            root.removeHandler(handler)
            handler.close()
