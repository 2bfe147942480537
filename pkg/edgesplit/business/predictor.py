# -*- coding: utf-8 -*-
"""
Builds and serves the accuracy-loss and compressed-size lookup tables.

A calibration record states, for one sample split at layer i and quantized to
c bits, whether the sample was classified correctly before and after the
compression and how many bytes the compressed feature map took. The tables
hold per-cell means of these records:

- accuracy loss A_i(c) = mean(correct_before) - mean(correct_after)
- expected size S_i(c) = mean(compressed_bytes), or a percentile

Counts and byte sums are integers, so the means do not depend on the order
of the records.
"""

from dataclasses import dataclass
import logging
import re

import numpy as np

from edgesplit.business.exceptions import (
    CoverageError,
    OutOfGridError,
    TableError,
)


LOG = logging.getLogger(__name__)

MEAN = 'mean'
_PERCENTILE = re.compile(r'^p(\d{1,2}(?:\.\d+)?)$')


@dataclass(frozen=True)
class CalibrationRecord(object):
    """
    The outcome of compressing the features of one sample at one cell.
    """

    sample_id: int
    layer_index: int
    bit_depth: int
    compressed_bytes: int
    correct_before: bool
    correct_after: bool


def parse_size_statistic(statistic):
    """
    Validates a size statistic, ``mean`` or ``pNN`` like ``p95``.

    Returns:
        None for the mean, else the percentile as float.
    """
    if statistic == MEAN:
        return None
    match = _PERCENTILE.match(statistic or '')
    if match is None or float(match.group(1)) > 100:
        raise TableError(
            'size statistic must be "mean" or a percentile like "p95", not '
            '"{0}"'.format(statistic))
    return float(match.group(1))


@dataclass(frozen=True, eq=False)
class LookupTables(object):
    """
    The accuracy-loss and compressed-size tables of one model.

    Row ``i - 1`` of every matrix holds decoupling point i, column ``k``
    holds bit-depth ``bit_depths[k]``.

    Attributes:
        n_layers: The number of decoupling points N.
        bit_depths: The ascending bit-depths of the table columns.
        accuracy_loss: N x C matrix of accuracy-loss fractions.
        expected_size: N x C matrix of expected compressed bytes.
        sample_count: N x C matrix of record counts.
        raw_upload_sizes: Dictionary with the ``raw`` and ``encoded`` input
            sizes used for the all-cloud split 0.
        size_statistic: ``mean`` or a percentile like ``p95``.
        model_name: The name of the model the tables were built for.
    """

    n_layers: int
    bit_depths: tuple
    accuracy_loss: np.ndarray
    expected_size: np.ndarray
    sample_count: np.ndarray
    raw_upload_sizes: dict
    size_statistic: str = MEAN
    model_name: str = ''

    def __post_init__(self):
        shape = (self.n_layers, len(self.bit_depths))
        for name in ('accuracy_loss', 'expected_size', 'sample_count'):
            matrix = np.array(getattr(self, name))
            if matrix.shape != shape:
                raise TableError(
                    '{0} has shape {1}, expected {2}'.format(
                        name, matrix.shape, shape))
            matrix.setflags(write=False)
            object.__setattr__(self, name, matrix)
        if list(self.bit_depths) != sorted(set(self.bit_depths)):
            raise TableError('bit-depths must be strictly ascending')
        object.__setattr__(self, 'bit_depths', tuple(self.bit_depths))
        if np.any(self.expected_size[self.sample_count > 0] <= 0):
            raise TableError('expected sizes must be > 0')

    def __eq__(self, other):
        return (isinstance(other, LookupTables)
                and self.n_layers == other.n_layers
                and self.bit_depths == other.bit_depths
                and np.array_equal(self.accuracy_loss, other.accuracy_loss)
                and np.array_equal(self.expected_size, other.expected_size)
                and np.array_equal(self.sample_count, other.sample_count)
                and self.raw_upload_sizes == other.raw_upload_sizes
                and self.size_statistic == other.size_statistic)

    def column(self, bit_depth):
        """
        The column index of a bit-depth.

        Raises:
            OutOfGridError: The bit-depth is not part of the table.
        """
        try:
            return self.bit_depths.index(bit_depth)
        except ValueError:
            raise OutOfGridError(
                'bit-depth {0} not in table bit-depths {1}'.format(
                    bit_depth, list(self.bit_depths)))

    def empty_cells(self):
        """
        The (layer, bit-depth) cells without samples.
        """
        rows, columns = np.nonzero(self.sample_count == 0)
        return [(int(row) + 1, self.bit_depths[column])
                for row, column in zip(rows, columns)]

    def upload_size(self, encoded=True):
        """
        The bytes uploaded by the all-cloud split.
        """
        return self.raw_upload_sizes['encoded' if encoded else 'raw']


def _check_cell(tables, layer_index, bit_depth):
    if layer_index < 0 or layer_index > tables.n_layers:
        raise OutOfGridError(
            'layer {0} outside 0..{1}'.format(layer_index, tables.n_layers))
    if layer_index == 0:
        return None
    return tables.column(bit_depth)


def lookup_accuracy(tables, layer_index, bit_depth):
    """
    The accuracy loss A_i(c). The all-cloud split 0 loses nothing.

    Raises:
        OutOfGridError: The cell is outside the table.
    """
    column = _check_cell(tables, layer_index, bit_depth)
    if column is None:
        return 0.0
    return float(tables.accuracy_loss[layer_index - 1, column])


def lookup_size(tables, layer_index, bit_depth, encoded=True):
    """
    The expected compressed size S_i(c) in bytes. The all-cloud split 0
    uploads the encoded input, or the raw input if ``encoded`` is False.

    Raises:
        OutOfGridError: The cell is outside the table.
    """
    column = _check_cell(tables, layer_index, bit_depth)
    if column is None:
        return float(tables.upload_size(encoded))
    return float(tables.expected_size[layer_index - 1, column])


class TableAccumulator(object):
    """
    Per-cell partial sums of calibration records.

    Accumulators built from parts of a corpus can be merged, which gives the
    same tables as accumulating the whole corpus.
    """

    def __init__(self, n_layers, bit_depths, keep_sizes=False):
        """
        Initialises the TableAccumulator.

        Args:
            n_layers: The number of decoupling points N.
            bit_depths: The bit-depths of the grid.
            keep_sizes: Keep every compressed size, needed for percentile
                statistics.
        """
        self.n_layers = n_layers
        self.bit_depths = tuple(sorted(set(bit_depths)))
        self._columns = dict(
            (bits, column) for column, bits in enumerate(self.bit_depths))
        shape = (n_layers, len(self.bit_depths))
        self.count = np.zeros(shape, dtype=np.int64)
        self.correct_before = np.zeros(shape, dtype=np.int64)
        self.correct_after = np.zeros(shape, dtype=np.int64)
        self.size_sum = np.zeros(shape, dtype=np.int64)
        self.sizes = {} if keep_sizes else None
        self.ignored = 0

    def add(self, record):
        """
        Adds one record. Records outside the grid are counted as ignored.
        """
        column = self._columns.get(record.bit_depth)
        if (column is None or record.layer_index < 1
                or record.layer_index > self.n_layers):
            self.ignored += 1
            return
        row = record.layer_index - 1
        self.count[row, column] += 1
        self.correct_before[row, column] += int(bool(record.correct_before))
        self.correct_after[row, column] += int(bool(record.correct_after))
        self.size_sum[row, column] += int(record.compressed_bytes)
        if self.sizes is not None:
            self.sizes.setdefault((row, column), []).append(
                int(record.compressed_bytes))

    def extend(self, records):
        for record in records:
            self.add(record)
        return self

    def merge(self, other):
        """
        Adds the partial sums of another accumulator of the same grid.
        """
        if (other.n_layers != self.n_layers
                or other.bit_depths != self.bit_depths):
            raise TableError('cannot merge accumulators of different grids')
        self.count += other.count
        self.correct_before += other.correct_before
        self.correct_after += other.correct_after
        self.size_sum += other.size_sum
        self.ignored += other.ignored
        if self.sizes is not None and other.sizes is not None:
            for cell, sizes in other.sizes.items():
                self.sizes.setdefault(cell, []).extend(sizes)
        return self

    def missing_cells(self):
        rows, columns = np.nonzero(self.count == 0)
        return [(int(row) + 1, self.bit_depths[column])
                for row, column in zip(rows, columns)]

    def tables(self, raw_upload_sizes, size_statistic=MEAN, model_name=''):
        """
        Builds the lookup tables.

        Raises:
            CoverageError: A cell of the grid has no records.
        """
        missing = self.missing_cells()
        if missing:
            raise CoverageError(missing)
        percentile = parse_size_statistic(size_statistic)
        accuracy_loss = (
            (self.correct_before - self.correct_after) / self.count)
        if percentile is None:
            expected_size = self.size_sum / self.count
        else:
            if self.sizes is None:
                raise TableError(
                    'percentile statistics need an accumulator keeping sizes')
            expected_size = np.zeros(self.count.shape)
            for (row, column), sizes in self.sizes.items():
                expected_size[row, column] = np.percentile(
                    sorted(sizes), percentile)
        return LookupTables(
            n_layers=self.n_layers,
            bit_depths=self.bit_depths,
            accuracy_loss=accuracy_loss,
            expected_size=expected_size,
            sample_count=self.count.copy(),
            raw_upload_sizes=dict(raw_upload_sizes),
            size_statistic=size_statistic,
            model_name=model_name)


def build_tables(records, model, bit_depths, size_statistic=MEAN):
    """
    Builds lookup tables from calibration records.

    Args:
        records: An iterable of CalibrationRecord.
        model: The ModelProfile the records were produced for.
        bit_depths: The bit-depths of the table grid.
        size_statistic: ``mean`` (default) or a percentile like ``p95`` for
            conservative planning.

    Returns:
        The LookupTables.

    Raises:
        CoverageError: A (layer, bit-depth) cell has no records. The error
            lists every missing cell.
    """
    parse_size_statistic(size_statistic)
    accumulator = TableAccumulator(
        model.n_points, bit_depths, keep_sizes=size_statistic != MEAN)
    accumulator.extend(records)
    if accumulator.ignored:
        LOG.warning(
            'ignored %d calibration records outside the table grid',
            accumulator.ignored)
    tables = accumulator.tables(
        raw_upload_sizes={
            'raw': model.input_bytes_raw,
            'encoded': model.input_bytes_encoded,
        },
        size_statistic=size_statistic,
        model_name=model.model_name)
    LOG.info(
        'built %dx%d lookup tables for %s from %d records',
        tables.n_layers, len(tables.bit_depths), model.model_name,
        int(accumulator.count.sum()))
    return tables


@dataclass(frozen=True)
class StabilityReport(object):
    """
    The divergence between two tables built from independent corpora.

    Attributes:
        max_accuracy_divergence: max |A - A'| over all cells.
        mean_accuracy_divergence: mean |A - A'|.
        max_size_divergence: max |S - S'| / S over all cells.
        mean_size_divergence: mean |S - S'| / S.
        accuracy_divergence: The per-cell |A - A'| matrix.
        size_divergence: The per-cell relative size divergence matrix.
    """

    max_accuracy_divergence: float
    mean_accuracy_divergence: float
    max_size_divergence: float
    mean_size_divergence: float
    accuracy_divergence: np.ndarray
    size_divergence: np.ndarray


def compare_tables(tables_a, tables_b):
    """
    Computes the per-cell divergence between two tables of the same grid.
    """
    if (tables_a.n_layers != tables_b.n_layers
            or tables_a.bit_depths != tables_b.bit_depths):
        raise TableError('cannot compare tables of different grids')
    accuracy = np.abs(tables_a.accuracy_loss - tables_b.accuracy_loss)
    size = (np.abs(tables_a.expected_size - tables_b.expected_size)
            / tables_a.expected_size)
    return StabilityReport(
        max_accuracy_divergence=float(accuracy.max()),
        mean_accuracy_divergence=float(accuracy.mean()),
        max_size_divergence=float(size.max()),
        mean_size_divergence=float(size.mean()),
        accuracy_divergence=accuracy,
        size_divergence=size)


def stability_report(records_a, records_b, model, bit_depths,
                     size_statistic=MEAN):
    """
    Builds tables from two corpora and reports how far they diverge.

    Args:
        records_a: The first corpus of CalibrationRecord.
        records_b: The second corpus.
        model: The ModelProfile of both corpora.
        bit_depths: The bit-depths of the grid.
        size_statistic: The size statistic of both builds.

    Returns:
        The StabilityReport.

    Raises:
        CoverageError: One of the corpora does not cover the grid.
    """
    return compare_tables(
        build_tables(records_a, model, bit_depths, size_statistic),
        build_tables(records_b, model, bit_depths, size_statistic))
