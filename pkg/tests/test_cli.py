import json
import math

import pytest
from conftest import PUBLISHED_MATRIX, PUBLISHED_VECTORS

from voxcurv.command_line_interface import main
from voxcurv.features import SQ_EUCLID, distance, feature_vector
from voxcurv.shapes import generate_shape
from voxcurv.surface import extract_surface
from voxcurv.vox_file import write_grid
from voxcurv.voxgrid import VoxelFormat, VoxelGrid


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_analyze_unit_cube(capsys, write_fixture):
    code, out, _ = run(capsys, 'analyze', write_fixture('cube:1'))
    assert code == 0
    report = json.loads(out)
    assert list(report) == ['input', 'surface', 'corner_identity', 'genus', 'nonmanifold', 'total_gaussian',
                            'feature_vector']
    assert report['surface']['counts']['M3'] == 8
    assert report['genus'] == 0
    assert report['nonmanifold'] is False
    assert report['surface']['surface_components'] == 1
    assert report['corner_identity']['holds'] is True
    assert report['total_gaussian']['quarter_pi_units'] == 8
    assert report['total_gaussian']['radians'] == pytest.approx(4 * math.pi)
    assert report['feature_vector']['ratios']['r3'] == 1


def test_analyze_torus(capsys, write_fixture):
    code, out, _ = run(capsys, 'analyze', write_fixture('torus:4,1', fmt=VoxelFormat.RAW))
    report = json.loads(out)
    assert code == 0
    assert report['input']['format'] == 'raw'
    assert report['genus'] == 1
    assert report['total_gaussian']['quarter_pi_units'] == 0
    # the identity is a genus 0 statement
    assert report['corner_identity']['holds'] is False


def test_analyze_six_component(capsys, write_fixture):
    _, out, _ = run(capsys, 'analyze', write_fixture('cube:2'), '--six')
    report = json.loads(out)
    assert report['feature_vector_six']['raw_counts'] == [8, 6, 12, 0, 0, 0]


def test_analyze_non_manifold(capsys, tmp_path):
    path = tmp_path / 'edge.vox'
    write_grid(VoxelGrid.from_cells((2, 2, 1), [(0, 0, 0), (1, 1, 0)]), path)
    code, out, _ = run(capsys, 'analyze', path)
    report = json.loads(out)
    assert code == 0
    assert 'genus' not in report
    assert report['nonmanifold'] is True
    assert report['surface']['edge_defects'] == 1
    assert report['corner_identity']['applicable'] is False
    assert 'surface_components' not in report['surface']


def test_analyze_empty_grid(capsys, tmp_path):
    path = tmp_path / 'empty.vox'
    write_grid(VoxelGrid.empty(3, 3, 3), path)
    code, out, err = run(capsys, 'analyze', path)
    assert code == 2
    assert out == ''
    assert 'empty object' in err


def test_analyze_input_errors(capsys, tmp_path):
    path = tmp_path / 'bad.vox'
    path.write_bytes(b'vox3 2 1 1\n1x\n')
    code, _, err = run(capsys, 'analyze', path)
    assert code == 2
    assert 'at byte 12' in err
    assert run(capsys, 'analyze', tmp_path / 'missing.vox')[0] == 2


def test_usage_errors(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, 'frobnicate')[0] == 2
    assert run(capsys, 'curvmap')[0] == 2


def test_help(capsys):
    code, out, _ = run(capsys, 'help')
    assert code == 0
    for command in ('analyze', 'curvmap', 'pyramid', 'compare', 'matrix', 'gen'):
        assert f'\n{command} ' in out


def test_curvmap_unit_cube(capsys, write_fixture):
    code, out, _ = run(capsys, 'curvmap', write_fixture('cube:1'), '--kind', 'gauss', '--axis', 'z', '--level', '0')
    assert code == 0
    assert out.splitlines()[1:] == ['3.141592654,3.141592654'] * 2


def test_curvmap_meanabs_slab(capsys, write_fixture, tmp_path):
    out_path = tmp_path / 'slab.csv'
    code, _, _ = run(capsys, 'curvmap', write_fixture('box:16,16,2'), '--kind', 'meanabs', '--axis', 'z',
                     '--level', '1', '--out', out_path)
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == '# vox3-map kind=mean_abs_sum level=1 plane=xy nx=9 ny=9'
    for row in lines[2:9]:
        assert row.split(',')[1:8] == ['0.000000000'] * 7


def test_curvmap_level_is_clamped(capsys, write_fixture):
    code, out, err = run(capsys, 'curvmap', write_fixture('cube:1'), '--level', '5')
    assert code == 0
    assert 'clamped' in err
    assert out.splitlines()[1:] == ['12.566370614']


def test_curvmap_pgm(capsys, write_fixture, tmp_path):
    out_path = tmp_path / 'map.pgm'
    code, _, _ = run(capsys, 'curvmap', write_fixture('sphere:3'), '--format', 'pgm', '--out', out_path)
    assert code == 0
    assert out_path.read_bytes().startswith(b'P5\n# scale=')


def test_curvmap_bad_level(capsys, write_fixture):
    assert run(capsys, 'curvmap', write_fixture('cube:1'), '--level', '-1')[0] == 2
    assert run(capsys, 'curvmap', write_fixture('cube:1'), '--kind', 'curly')[0] == 2


def test_pyramid_totals_are_conserved(capsys, write_fixture, tmp_path):
    out_dir = tmp_path / 'levels'
    code, out, _ = run(capsys, 'pyramid', write_fixture('cube:1'), '--kind', 'gauss', '--axis', 'z',
                       '--levels', '2', '--out', out_dir)
    assert code == 0
    summary = json.loads(out)
    assert [level['total_quarter_pi_units'] for level in summary['levels']] == [8, 8]
    assert [level['total'] for level in summary['levels']] == pytest.approx([4 * math.pi] * 2)
    assert (out_dir / 'level_0.csv').exists() and (out_dir / 'level_1.csv').exists()
    assert json.loads((out_dir / 'summary.json').read_text()) == summary


def test_pyramid_meanabs_argmax(capsys, write_fixture, tmp_path):
    code, out, _ = run(capsys, 'pyramid', write_fixture('bump_plate:32,1,12'), '--kind', 'meanabs',
                       '--levels', '3', '--out', tmp_path / 'bump')
    assert code == 0
    levels = json.loads(out)['levels']
    assert [len(level['argmax']) for level in levels] == [2, 2, 2]
    assert all(level['max'] > 0 for level in levels)


def test_pyramid_needs_levels(capsys, write_fixture, tmp_path):
    assert run(capsys, 'pyramid', write_fixture('cube:1'), '--levels', '0', '--out', tmp_path / 'p')[0] == 2


def test_compare(capsys, write_fixture):
    a = write_fixture('cube:3')
    b = write_fixture('sphere:3')
    assert run(capsys, 'compare', a, a)[1] == '0.000000000\n'

    code, out, _ = run(capsys, 'compare', a, b, '--metric', 'sq')
    expected = distance(feature_vector(extract_surface(generate_shape('cube:3'))),
                        feature_vector(extract_surface(generate_shape('sphere:3'))),
                        SQ_EUCLID)
    assert code == 0
    assert out == f'{expected:.9f}\n'


def test_compare_rejects_small_p(capsys, write_fixture):
    a = write_fixture('cube:1')
    code, _, err = run(capsys, 'compare', a, a, '--metric', 'minkowski:0.5')
    assert code == 2
    assert 'p must be ≥ 1' in err


def test_matrix_from_published_vectors(capsys, tmp_path):
    vectors = tmp_path / 'vectors.json'
    vectors.write_text(json.dumps({label.replace('e', ''): list(r) for label, r in PUBLISHED_VECTORS.items()}))
    out_csv = tmp_path / 'matrix.csv'
    code, out, _ = run(capsys, 'matrix', '--vectors-json', vectors, '--metric', 'sq', '--out', out_csv)
    assert code == 0

    rows = [line.split(',') for line in out_csv.read_text().splitlines()]
    assert rows[0] == ['label', '1', '2', '3', '4', '5', '6']
    for (i, j), expected in PUBLISHED_MATRIX.items():
        assert float(rows[i][j]) == pytest.approx(expected, abs=1e-7)
        assert rows[i][j] == rows[j][i]

    summary = json.loads(out)
    nearest = {label: ranked[0]['label'] for label, ranked in summary['neighbors'].items()}
    assert nearest == {'1': '2', '2': '1', '3': '6', '4': '5', '5': '4', '6': '3'}


def test_matrix_of_files(capsys, tmp_path, write_fixture):
    write_fixture('cube:2', name='b_cube.vox')
    write_fixture('cube:2', name='a_cube.raw', fmt=VoxelFormat.RAW)
    write_fixture('sphere:2', name='c_sphere.vox')
    code, out, _ = run(capsys, 'matrix', tmp_path)
    assert code == 0
    rows = [line.split(',') for line in out.splitlines()]
    assert rows[0] == ['label', 'a_cube', 'b_cube', 'c_sphere']
    assert rows[1][2] == '0.000000000'
    assert float(rows[1][3]) > 0


def test_matrix_list_file(capsys, tmp_path, write_fixture):
    write_fixture('cube:2', name='one.vox')
    write_fixture('cube:3', name='two.vox')
    listing = tmp_path / 'inputs.txt'
    listing.write_text('two.vox\none.vox\n')
    code, out, _ = run(capsys, 'matrix', '--list', listing)
    assert code == 0
    assert out.splitlines()[0] == 'label,one,two'


def test_matrix_errors(capsys, tmp_path, write_fixture):
    single = write_fixture('cube:2', name='only.vox')
    assert run(capsys, 'matrix', single)[0] == 2
    broken = tmp_path / 'broken.vox'
    broken.write_bytes(b'garbage')
    code, _, err = run(capsys, 'matrix', single, broken)
    assert code == 2
    assert 'broken.vox' in err


def test_gen(capsys, tmp_path):
    path = tmp_path / 'cube.vox'
    assert run(capsys, 'gen', 'cube:3', '--out', path)[0] == 0
    assert path.read_bytes() == b'vox3 3 3 3\n' + b'111\n' * 9


def test_gen_is_deterministic(capsys, tmp_path):
    for name in ('a.raw', 'b.raw'):
        assert run(capsys, 'gen', 'blob:7,20', '--format', 'raw', '--out', tmp_path / name)[0] == 0
    assert (tmp_path / 'a.raw').read_bytes() == (tmp_path / 'b.raw').read_bytes()


def test_gen_torus_is_genus_one(capsys, tmp_path):
    path = tmp_path / 'torus.vox'
    run(capsys, 'gen', 'torus:4,1', '--out', path)
    assert json.loads(run(capsys, 'analyze', path)[1])['genus'] == 1


def test_gen_bad_spec(capsys):
    assert run(capsys, 'gen', 'pyramid:3')[0] == 2


@pytest.mark.parametrize('seed', range(20))
def test_outputs_do_not_depend_on_threads(capsys, write_fixture, seed):
    path = write_fixture(f'blob:{seed},{3 + seed % 9},{10 + seed % 7}')
    for command in (['analyze', path, '--six'], ['curvmap', path, '--kind', 'meanabs', '--axis', 'y'],
                    ['curvmap', path, '--axis', 'volume']):
        single = run(capsys, *command, '--threads', '1')
        parallel = run(capsys, *command, '--threads', '8')
        assert single[0] == parallel[0] == 0
        assert single[1] == parallel[1]


def test_threads_from_environment(capsys, write_fixture, monkeypatch):
    path = write_fixture('cube:2')
    monkeypatch.setenv('VOXCURV_THREADS', '3')
    assert run(capsys, 'analyze', path)[0] == 0
    monkeypatch.setenv('VOXCURV_THREADS', '0')
    assert run(capsys, 'analyze', path)[0] == 2


@pytest.mark.parametrize('entry', [5, [None, 0, 0, 0], 'abc'])
def test_matrix_rejects_malformed_vectors(capsys, tmp_path, entry):
    vectors = tmp_path / 'vectors.json'
    vectors.write_text(json.dumps({'a': [1, 0, 0, 0], 'b': entry}))
    code, out, err = run(capsys, 'matrix', '--vectors-json', vectors)
    assert code == 2
    assert out == ''
    assert '"b"' in err


def test_compare_infinite_minkowski(capsys, write_fixture):
    a = write_fixture('cube:2', name='a.vox')
    b = write_fixture('sphere:2', name='b.vox')
    assert run(capsys, 'compare', a, a, '--metric', 'minkowski:inf')[:2] == (0, '0.000000000\n')
    ratios_a = feature_vector(extract_surface(generate_shape('cube:2'))).ratios
    ratios_b = feature_vector(extract_surface(generate_shape('sphere:2'))).ratios
    expected = max(abs(x - y) for x, y in zip(ratios_a, ratios_b))
    assert run(capsys, 'compare', a, b, '--metric', 'minkowski:inf')[1] == f'{expected:.9f}\n'
