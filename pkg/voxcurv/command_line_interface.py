import argparse
import inspect
import json
import logging
import sys
from pathlib import Path

from voxcurv import logging_default as log, utils
from voxcurv.curvature import ConsistencyError, assign_curvatures, genus, total_gaussian
from voxcurv.features import (Metric, distance, distance_matrix, feature_vector, load_vectors_json,
                              neighbors_summary, write_matrix_csv)
from voxcurv.map_file import MapFormat, format_csv, write_map
from voxcurv.multiscale import MapKind, gauss_projection_map, gauss_volume_map, mean_abs_map, pyramid
from voxcurv.shapes import generate_shape
from voxcurv.surface import VertexType, extract_surface
from voxcurv.vox_file import detect_format, load_grid, save_grid
from voxcurv.voxgrid import VoxelFormat, grid_stats

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONSISTENCY = 3

KINDS = {'gauss': MapKind.GAUSS_SUM, 'meanabs': MapKind.MEAN_ABS_SUM}


def _print_doc(string):
    """
    Attempts to remove common white space at the start of the lines in a doc string
    to unify the output of doc strings with different indention levels.

    Keeps whitespace lines intact.
    """
    lines = string.split('\n')
    if lines:
        prefix_i = 0
        for i, line_0 in enumerate(lines):
            # find non empty start lines
            if line_0.strip():
                # traverse line and stop if character mismatch with other non empty lines
                for prefix_i, c in enumerate(line_0):
                    if not c.isspace():
                        break
                    if any(lines[j].strip() and (prefix_i >= len(lines[j]) or c != lines[j][prefix_i])
                           for j in range(i+1, len(lines))):
                        break
                break

        for line in lines:
            print(line[prefix_i:] if line.strip() else line)


def _dump_json(data):
    return json.dumps(data, indent=2, ensure_ascii=False) + '\n'


def _load(path, fmt=None):
    """
    :returns (grid, format the grid was decoded with)
    """
    with open(path, 'rb') as reader:
        data = reader.read()
    fmt = VoxelFormat.from_arg(fmt) if fmt else detect_format(data)
    return load_grid(data, fmt), fmt


def _load_member(path, fmt=None):
    try:
        return _load(path, fmt)[0]
    except (OSError, ValueError) as e:
        raise ValueError(f'{path}: {e}')


def _require_object(grid):
    if grid.occupied_count() == 0:
        raise ValueError('empty object')


class VoxcurvCLI:
    def __init__(self, threads=1):
        self.threads = threads

    def _field(self, path, fmt=None):
        grid, _ = _load(path, fmt)
        _require_object(grid)
        mesh = extract_surface(grid, threads=self.threads)
        return assign_curvatures(mesh)

    def _level_maps(self, field, kind, axis, levels):
        if kind == MapKind.GAUSS_SUM:
            base = gauss_volume_map(field, self.threads) if axis == 'volume' \
                else gauss_projection_map(field, axis, self.threads)
        else:
            if axis == 'volume':
                raise ValueError('meanabs maps are projections, use --axis x, y or z')
            base = mean_abs_map(field, axis, block=1)
        return pyramid(base, levels)

    def cmd_help(self, args=None):
        print('Commands:')
        for name, fun in inspect.getmembers(self):
            if name.startswith('cmd_') and fun.__doc__:
                _print_doc(fun.__doc__)
        print('Every command takes --threads N, -v/--verbose and -l/--log <name>.')

    def cmd_analyze(self, args):
        """
        analyze <input> [--format text|raw] [--six]
            Prints a JSON report: grid statistics, corner counts per type, the corner-count identity
            |M3| = 8 + |M5| + 2|M6|, genus (single closed manifold surfaces only), total Gaussian curvature
            and the curvature ratio feature vector. --six adds the six component vector.
        """
        grid, fmt = _load(args.input, args.format)
        _require_object(grid)
        stats = grid_stats(grid)
        mesh = extract_surface(grid, threads=self.threads)
        field = assign_curvatures(mesh)

        m3 = mesh.count(VertexType.M3)
        m5 = mesh.count(VertexType.M5)
        m6 = mesh.count(VertexType.M6A) + mesh.count(VertexType.M6B)
        single_surface = mesh.is_manifold() and mesh.surface_components == 1

        report = {
            'input': {
                'path': str(args.input),
                'format': fmt.value,
                'dimensions': list(grid.shape),
                'occupied': stats.occupied_count,
                'components': stats.component_count_6adj,
            },
            'surface': {
                'vertices': mesh.vertex_count(),
                'faces': mesh.face_count(),
                'counts': mesh.counts(),
                'nonmanifold': mesh.nonmanifold_count(),
                'edge_defects': len(mesh.edge_defects),
            },
            'corner_identity': {
                'm3': m3,
                'expected': 8 + m5 + 2 * m6,
                'holds': m3 == 8 + m5 + 2 * m6,
                'applicable': single_surface,
                'note': 'holds exactly for a single closed manifold surface of genus 0' if single_surface
                else 'needs a single closed manifold surface, reported for information only',
            },
        }
        if mesh.is_manifold():
            # objects + backgrounds - 1 only counts closed surfaces on a manifold
            report['surface']['surface_components'] = mesh.surface_components
        if single_surface:
            report['genus'] = genus(mesh)
        report['nonmanifold'] = not mesh.is_manifold()
        total = total_gaussian(field)
        report['total_gaussian'] = {'quarter_pi_units': total.quarter_pi_units, 'radians': total.radians}
        report['feature_vector'] = feature_vector(mesh).as_dict()
        if args.six:
            report['feature_vector_six'] = feature_vector(mesh, six_component=True).as_dict()

        sys.stdout.write(_dump_json(report))

    def cmd_curvmap(self, args):
        """
        curvmap <input> --kind gauss|meanabs --axis x|y|z [--level K] [--out PATH] [--format csv|pgm]
            Writes the level K map of Gaussian curvature sums (or |H| sums) of the columns along the axis,
            one cell per 2^K x 2^K columns. Gauss maps also take --axis volume for a 3D map.
            Levels past a single cell are clamped with a warning.
        """
        if args.level < 0:
            raise ValueError(f'Level must be >= 0, got {args.level}')
        fmt = MapFormat.from_arg(args.format)
        field = self._field(args.input, args.input_format)
        scale_map = self._level_maps(field, KINDS[args.kind], args.axis, args.level + 1)[-1]

        if args.out is None:
            if fmt == MapFormat.PGM:
                raise ValueError('PGM output needs --out')
            sys.stdout.write(format_csv(scale_map))
        else:
            write_map(scale_map, args.out, fmt)

    def cmd_pyramid(self, args):
        """
        pyramid <input> --kind gauss|meanabs --axis x|y|z --levels L --out DIR [--format csv|pgm]
            Writes level_<k>.<csv|pgm> for k = 0 .. L-1 and summary.json with the total, maximum and
            argmax cell of every level. The summary is also printed.
        """
        if args.levels < 1:
            raise ValueError(f'Pyramid needs at least 1 level, got {args.levels}')
        fmt = MapFormat.from_arg(args.format)
        field = self._field(args.input, args.input_format)
        maps = self._level_maps(field, KINDS[args.kind], args.axis, args.levels)

        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        levels = []
        for scale_map in maps:
            name = f'level_{scale_map.level}.{fmt.value}'
            write_map(scale_map, out / name, fmt)
            entry = {'level': scale_map.level, 'shape': list(scale_map.shape), 'file': name,
                     'total': scale_map.total()}
            if scale_map.kind == MapKind.GAUSS_SUM:
                entry['total_quarter_pi_units'] = scale_map.exact_total().quarter_pi_units
            argmax = scale_map.argmax()
            entry['argmax'] = list(argmax)
            entry['max'] = float(scale_map.values[argmax])
            levels.append(entry)

        summary = {'kind': maps[0].kind.value, 'plane': maps[0].plane, 'levels': levels}
        text = _dump_json(summary)
        with open(out / 'summary.json', 'w', newline='\n') as writer:
            writer.write(text)
        sys.stdout.write(text)

    def cmd_compare(self, args):
        """
        compare <input_a> <input_b> [--metric euclid|sq|minkowski:p] [--six]
            Prints the distance between the curvature ratio vectors of two objects with 9 decimals.
        """
        metric = Metric.from_arg(args.metric)
        vectors = []
        for path in (args.input_a, args.input_b):
            grid = _load_member(path, args.format)
            _require_object(grid)
            vectors.append(feature_vector(extract_surface(grid, threads=self.threads), six_component=args.six))
        print(f'{distance(vectors[0], vectors[1], metric):.9f}')

    def _matrix_inputs(self, args):
        paths = []
        for item in args.inputs:
            item = Path(item)
            if item.is_dir():
                paths.extend(p for p in item.iterdir() if p.is_file())
            else:
                paths.append(item)
        if args.list:
            base = Path(args.list).parent
            with open(args.list) as reader:
                paths.extend(base / line.strip() for line in reader if line.strip())

        paths.sort(key=lambda p: (p.stem, str(p)))
        labels = [p.stem for p in paths]
        if len(set(labels)) != len(labels):
            raise ValueError(f'Input file stems must be unique, got {labels}')

        vectors = []
        for path in paths:
            grid = _load_member(path, args.format)
            if grid.occupied_count() == 0:
                raise ValueError(f'{path}: empty object')
            vectors.append(feature_vector(extract_surface(grid, threads=self.threads), six_component=args.six))
        return labels, vectors

    def cmd_matrix(self, args):
        """
        matrix <inputs or directories ...> [--list FILE] [--metric euclid|sq|minkowski:p] [--out CSV]
               [--neighbors JSON] [-k K] [--vectors-json FILE] [--six]
            Pairwise distance matrix of the curvature ratio vectors, labelled by file stem in
            lexicographic order, plus a nearest neighbour summary. The CSV goes to --out or standard
            output, the summary to --neighbors or, with --out, to standard output.
            --vectors-json reads {"label": [r3, r4, r5, r6], ...} instead of voxel files.
        """
        metric = Metric.from_arg(args.metric)
        if args.vectors_json:
            with open(args.vectors_json) as reader:
                labels, vectors = load_vectors_json(reader.read())
        else:
            labels, vectors = self._matrix_inputs(args)

        matrix = distance_matrix(vectors, labels, metric, threads=self.threads)
        summary = _dump_json(neighbors_summary(matrix, min(args.k, matrix.n - 1)))
        write_matrix_csv(matrix, args.out)
        if args.neighbors:
            with open(args.neighbors, 'w', newline='\n') as writer:
                writer.write(summary)
        elif args.out:
            sys.stdout.write(summary)

    def cmd_gen(self, args):
        """
        gen <shape spec> [--out PATH] [--format text|raw]
            Writes a fixture volume: cube:a, box:a,b,c, sphere:r, torus:R,r_tube, blob:seed,steps[,size],
            bump_plate:w,h,bump_r or holed_plate:holes.
        """
        grid = generate_shape(args.shape)
        data = save_grid(grid, VoxelFormat.from_arg(args.format))
        if args.out is None:
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
        else:
            with open(args.out, 'wb') as writer:
                writer.write(data)


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--threads', type=int, default=None,
                        help=f'worker count, defaults to ${utils.THREADS_ENV} or the number of cores')
    common.add_argument('-v', '--verbose', action='store_true', help='debug output on standard error')
    common.add_argument('-l', '--log', help='also log to a dated file with this name')

    parser = argparse.ArgumentParser(prog='voxcurv', description='Digital curvatures of voxel objects')
    commands = parser.add_subparsers(dest='command')

    commands.add_parser('help', parents=[common], help='print the commands')

    analyze = commands.add_parser('analyze', parents=[common], help='curvature and topology report')
    analyze.add_argument('input')
    analyze.add_argument('--format', choices=[f.value for f in VoxelFormat], help='input format, detected if omitted')
    analyze.add_argument('--six', action='store_true', help='include the six component feature vector')

    for name, help_text in (('curvmap', 'single scale map'), ('pyramid', 'all levels of a scale pyramid')):
        sub = commands.add_parser(name, parents=[common], help=help_text)
        sub.add_argument('input')
        sub.add_argument('--kind', choices=list(KINDS), default='gauss')
        sub.add_argument('--axis', choices=['x', 'y', 'z', 'volume'], default='z')
        sub.add_argument('--format', choices=[f.value for f in MapFormat], default=MapFormat.CSV.value)
        sub.add_argument('--input-format', choices=[f.value for f in VoxelFormat])
        if name == 'curvmap':
            sub.add_argument('--level', type=int, default=0)
            sub.add_argument('--out')
        else:
            sub.add_argument('--levels', type=int, required=True)
            sub.add_argument('--out', required=True)

    compare = commands.add_parser('compare', parents=[common], help='distance between two objects')
    compare.add_argument('input_a')
    compare.add_argument('input_b')
    compare.add_argument('--metric', default='euclid')
    compare.add_argument('--format', choices=[f.value for f in VoxelFormat])
    compare.add_argument('--six', action='store_true')

    matrix = commands.add_parser('matrix', parents=[common], help='pairwise distance matrix')
    matrix.add_argument('inputs', nargs='*')
    matrix.add_argument('--list', help='file with one input path per line, relative to the list file')
    matrix.add_argument('--metric', default='euclid')
    matrix.add_argument('--out')
    matrix.add_argument('--neighbors')
    matrix.add_argument('-k', type=int, default=1)
    matrix.add_argument('--vectors-json')
    matrix.add_argument('--format', choices=[f.value for f in VoxelFormat])
    matrix.add_argument('--six', action='store_true')

    gen = commands.add_parser('gen', parents=[common], help='write a fixture volume')
    gen.add_argument('shape')
    gen.add_argument('--out')
    gen.add_argument('--format', choices=[f.value for f in VoxelFormat], default=VoxelFormat.TEXT.value)

    return parser


def main(argv=None):
    """
    :returns exit code, 0 on success, 2 for usage and input errors, 3 for internal consistency failures
    """
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_INPUT

    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_INPUT

    log.configure(console_level=logging.DEBUG if args.verbose else logging.WARNING, logfile_name=args.log)

    try:
        cli = VoxcurvCLI(utils.resolve_threads(args.threads))
        getattr(cli, f'cmd_{args.command}')(args)
    except ConsistencyError as e:
        logger.exception(e)
        print(f'voxcurv: internal consistency failure: {e}', file=sys.stderr)
        return EXIT_CONSISTENCY
    except (ValueError, OSError) as e:
        print(f'voxcurv: {e}', file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
