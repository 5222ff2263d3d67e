import enum
import json
import logging
import math
import sys
from typing import Optional, Tuple

import numpy as np

from voxcurv import utils
from voxcurv.surface import SurfaceMesh, VertexType

logger = logging.getLogger(__name__)

COMPONENT_NAMES = ('r3', 'r4', 'r5', 'r6')
SIX_COMPONENT_NAMES = ('r3', 'r4flat', 'r4bent', 'r5', 'r6a', 'r6b')


class FeatureVector:
    """
    Curvature ratio vector fv = (|M3|, |M4|, |M5|, |M6|) / T, or the six component form that keeps
    M4 flat/bent and M6a/M6b apart. T counts every surface vertex including non-manifold ones,
    so the ratios may sum below 1.

    Vectors built from published ratios have no counts, total and raw_counts are None.
    """
    def __init__(self, ratios: Tuple[float, ...], total: Optional[int] = None,
                 raw_counts: Optional[Tuple[int, ...]] = None, nonmanifold=0):
        self.ratios = tuple(ratios)
        self.total = total
        self.raw_counts = raw_counts
        self.nonmanifold = nonmanifold
        if len(self.ratios) not in (len(COMPONENT_NAMES), len(SIX_COMPONENT_NAMES)):
            raise ValueError(f'Feature vectors have 4 or 6 components, got {len(self.ratios)}')
        if any(not 0 <= r <= 1 for r in self.ratios):
            raise ValueError(f'Ratios must lie in [0, 1], got {self.ratios}')

    @staticmethod
    def from_counts(counts, total, nonmanifold=0):
        """
        :param counts: 4 or 6 type counts
        :param total: T, the number of surface points the counts are divided by
        """
        if total < 1:
            raise ValueError(f'Total surface points must be positive, got {total}')
        if any(c < 0 for c in counts):
            raise ValueError(f'Counts must be non-negative, got {counts}')
        counts = tuple(int(c) for c in counts)
        return FeatureVector(tuple(c / total for c in counts), int(total), counts, int(nonmanifold))

    @staticmethod
    def from_ratios(ratios):
        return FeatureVector(tuple(float(r) for r in ratios))

    @property
    def six_component(self):
        return len(self.ratios) == len(SIX_COMPONENT_NAMES)

    @property
    def names(self):
        return SIX_COMPONENT_NAMES if self.six_component else COMPONENT_NAMES

    def ratio_sum(self):
        return sum(self.ratios)

    def as_dict(self):
        """
        :returns JSON friendly dict with a fixed key order
        """
        result = {'ratios': dict(zip(self.names, self.ratios)), 'T': self.total}
        if self.raw_counts is not None:
            result['raw_counts'] = list(self.raw_counts)
        result['nonmanifold'] = self.nonmanifold
        result['ratio_sum'] = self.ratio_sum()
        return result

    def __str__(self):
        return '(' + ', '.join(f'{r:.6f}' for r in self.ratios) + ')'

    def _key(self):
        return self.ratios, self.total, self.raw_counts, self.nonmanifold

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f'FeatureVector({self}, T={self.total})'


def feature_vector(mesh: SurfaceMesh, six_component=False):
    """
    :param six_component: keep the M4 and M6 sub types apart
    """
    if mesh.is_empty():
        raise ValueError('Feature vector of an empty object is undefined (T = 0)')

    m3, m4_flat, m4_bent, m5 = (mesh.count(t) for t in (VertexType.M3, VertexType.M4_FLAT,
                                                          VertexType.M4_BENT, VertexType.M5))
    m6a, m6b = mesh.count(VertexType.M6A), mesh.count(VertexType.M6B)
    if six_component:
        counts = (m3, m4_flat, m4_bent, m5, m6a, m6b)
    else:
        counts = (m3, m4_flat + m4_bent, m5, m6a + m6b)
    return FeatureVector.from_counts(counts, mesh.vertex_count(), mesh.nonmanifold_count())


class MetricKind(enum.Enum):
    EUCLID = 'euclid'
    SQ_EUCLID = 'sq_euclid'
    MINKOWSKI = 'minkowski'


class Metric:
    def __init__(self, kind: MetricKind, p=2.0):
        self.kind = kind
        self.p = p
        if self.kind == MetricKind.MINKOWSKI and not self.p >= 1:
            raise ValueError('p must be ≥ 1')

    @staticmethod
    def from_arg(arg):
        """
        :param arg: "euclid", "sq" (or "sq_euclid") or "minkowski:<p>", p = inf gives the maximum difference
        """
        name, _, param = arg.partition(':')
        name = name.strip().lower()
        if name == 'euclid':
            return EUCLID
        if name in ('sq', 'sq_euclid'):
            return SQ_EUCLID
        if name == 'minkowski':
            try:
                p = float(param)
            except ValueError:
                raise ValueError(f'Minkowski metric needs a numeric p, e.g. "minkowski:3", got "{arg}"')
            return Metric(MetricKind.MINKOWSKI, p)
        raise ValueError(f'Unknown metric "{arg}", expected euclid, sq or minkowski:p')

    def __str__(self):
        if self.kind == MetricKind.MINKOWSKI:
            return f'minkowski:{self.p:g}'
        return self.kind.value

    def __eq__(self, other):
        if not isinstance(other, Metric):
            return NotImplemented
        return str(self) == str(other)

    def __hash__(self):
        return hash(str(self))

    def __repr__(self):
        return f'Metric({self})'


EUCLID = Metric(MetricKind.EUCLID)
SQ_EUCLID = Metric(MetricKind.SQ_EUCLID)


def distance(a: FeatureVector, b: FeatureVector, metric: Metric = EUCLID):
    if len(a.ratios) != len(b.ratios):
        raise ValueError(f'Cannot compare a {len(a.ratios)} component vector with a {len(b.ratios)} component one')
    diff = np.subtract(a.ratios, b.ratios)
    if metric.kind == MetricKind.SQ_EUCLID:
        return float(np.dot(diff, diff))
    if metric.kind == MetricKind.EUCLID:
        return float(np.sqrt(np.dot(diff, diff)))
    if math.isinf(metric.p):
        return float(np.max(np.abs(diff)))
    return float(np.sum(np.abs(diff) ** metric.p) ** (1 / metric.p))


class DistanceMatrix:
    """
    Symmetric n x n matrix of pairwise distances with zero diagonal.
    """
    def __init__(self, labels, values, metric: Metric):
        self.labels = tuple(labels)
        self.values = values
        self.metric = metric

    @property
    def n(self):
        return len(self.labels)

    def index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f'Unknown label "{label}"')

    def between(self, label_a, label_b):
        return float(self.values[self.index(label_a), self.index(label_b)])

    def permuted(self, order):
        """
        :param order: labels in the new order
        """
        indices = [self.index(label) for label in order]
        return DistanceMatrix(order, self.values[np.ix_(indices, indices)], self.metric)

    def __repr__(self):
        return f'DistanceMatrix({self.metric}, labels={self.labels})'


def distance_matrix(vectors, labels=None, metric: Metric = EUCLID, threads=1):
    """
    :param labels: one identifier per vector, "1" .. "n" if None
    :param threads: pairs are computed on a thread pool, the result does not depend on it
    """
    vectors = list(vectors)
    if labels is None:
        labels = [str(i + 1) for i in range(len(vectors))]
    labels = list(labels)
    if len(labels) != len(vectors):
        raise ValueError(f'{len(vectors)} vectors but {len(labels)} labels')
    if len(vectors) < 2:
        raise ValueError(f'Distance matrix needs at least 2 objects, got {len(vectors)}')
    if len(set(labels)) != len(labels):
        raise ValueError(f'Labels must be unique, got {labels}')

    n = len(vectors)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    distances = utils.parallel_map(lambda pair: distance(vectors[pair[0]], vectors[pair[1]], metric), pairs, threads)

    values = np.zeros((n, n), dtype=np.float64)
    for (i, j), d in zip(pairs, distances):
        values[i, j] = values[j, i] = d
    return DistanceMatrix(labels, values, metric)


def nearest_neighbors(matrix: DistanceMatrix, k=1):
    """
    :returns dict label -> list of the k nearest (label, distance) pairs, ascending,
             ties in label order of the matrix
    """
    if not 1 <= k < matrix.n:
        raise ValueError(f'k must be in [1, {matrix.n - 1}], got {k}')
    neighbors = {}
    for i, label in enumerate(matrix.labels):
        ranked = sorted((float(matrix.values[i, j]), j) for j in range(matrix.n) if j != i)
        neighbors[label] = [(matrix.labels[j], d) for d, j in ranked[:k]]
    return neighbors


def neighbors_summary(matrix: DistanceMatrix, k=1):
    neighbors = nearest_neighbors(matrix, k)
    return {
        'metric': str(matrix.metric),
        'k': k,
        'labels': list(matrix.labels),
        'neighbors': {label: [{'label': other, 'distance': d} for other, d in ranked]
                      for label, ranked in neighbors.items()},
    }


def format_matrix_csv(matrix: DistanceMatrix):
    lines = ['label,' + ','.join(matrix.labels)]
    for label, row in zip(matrix.labels, matrix.values):
        lines.append(label + ',' + ','.join(f'{d:.9f}' for d in row))
    return '\n'.join(lines) + '\n'


def write_matrix_csv(matrix: DistanceMatrix, path=None):
    """
    Writes the full symmetric matrix, to standard output if path is None.
    """
    with utils.get_output(path=path, default=sys.stdout) as output:
        output.write(format_matrix_csv(matrix))


def load_vectors_json(text):
    """
    Externally supplied vectors, a JSON object label -> list of 4 or 6 ratios.
    :returns (labels sorted lexicographically, FeatureVectors)
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f'Malformed vectors JSON: {e}')
    if not isinstance(data, dict):
        raise ValueError('Vectors JSON must be an object mapping labels to ratio lists')
    labels = sorted(data)
    vectors = []
    for label in labels:
        ratios = data[label]
        if not isinstance(ratios, list) or \
                not all(isinstance(r, (int, float)) and not isinstance(r, bool) for r in ratios):
            raise ValueError(f'Vector "{label}" must be a list of 4 or 6 numbers, got {json.dumps(ratios)}')
        try:
            vectors.append(FeatureVector.from_ratios(ratios))
        except ValueError as e:
            raise ValueError(f'Vector "{label}": {e}')
    return labels, vectors
