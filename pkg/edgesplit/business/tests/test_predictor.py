# -*- coding: utf-8 -*-

from unittest import TestCase

import numpy as np

from edgesplit.business.exceptions import (
    CoverageError,
    OutOfGridError,
    TableError,
)
from edgesplit.business.predictor import (
    CalibrationRecord,
    TableAccumulator,
    build_tables,
    compare_tables,
    lookup_accuracy,
    lookup_size,
    parse_size_statistic,
)
from edgesplit.data.profiles import DecouplingPoint, ModelProfile


def two_layer_model():
    return ModelProfile(
        model_name='tiny',
        input_bytes_raw=1000,
        input_bytes_encoded=600,
        points=(
            DecouplingPoint(1, 'conv', 100, 64, (4, 4, 4)),
            DecouplingPoint(2, 'fc', 50, 10, (10,)),
        ))


def corpus():
    """
    Four samples over the 2 x (2, 4) grid. Cell (1, 2) loses two of three
    correct samples and has sizes 100 to 400.
    """
    before = [True, True, True, False]
    after = {
        (1, 2): [True, False, False, False],
        (1, 4): [True, True, False, False],
        (2, 2): [True, True, True, False],
        (2, 4): [True, True, True, False],
    }
    records = []
    for sample in range(4):
        for (layer, bits), flags in sorted(after.items()):
            records.append(CalibrationRecord(
                sample_id=sample,
                layer_index=layer,
                bit_depth=bits,
                compressed_bytes=100 * (sample + 1) * bits // 2 // layer,
                correct_before=before[sample],
                correct_after=flags[sample]))
    return records


class BuildTablesTest(TestCase):

    def test_means(self):
        tables = build_tables(corpus(), two_layer_model(), (2, 4))
        self.assertEqual(tables.n_layers, 2)
        self.assertEqual(tables.bit_depths, (2, 4))
        self.assertEqual(tables.model_name, 'tiny')
        self.assertEqual(
            tables.accuracy_loss.tolist(), [[0.5, 0.25], [0.0, 0.0]])
        self.assertEqual(tables.expected_size[0, 0], 250.0)
        self.assertEqual(tables.expected_size[0, 1], 500.0)
        self.assertEqual(tables.sample_count.tolist(), [[4, 4], [4, 4]])
        self.assertEqual(tables.empty_cells(), [])

    def test_order_independent(self):
        records = corpus()
        forward = build_tables(records, two_layer_model(), (2, 4))
        backward = build_tables(
            list(reversed(records)), two_layer_model(), (2, 4))
        self.assertEqual(forward, backward)

    def test_percentile(self):
        tables = build_tables(corpus(), two_layer_model(), (2, 4), 'p50')
        self.assertEqual(tables.expected_size[0, 0], 250.0)
        tables = build_tables(corpus(), two_layer_model(), (2, 4), 'p100')
        self.assertEqual(tables.expected_size[0, 0], 400.0)
        self.assertEqual(tables.size_statistic, 'p100')

    def test_coverage(self):
        records = [record for record in corpus()
                   if (record.layer_index, record.bit_depth) != (2, 4)]
        with self.assertRaises(CoverageError) as context:
            build_tables(records, two_layer_model(), (2, 4))
        self.assertEqual(context.exception.missing, [(2, 4)])
        self.assertEqual(
            str(context.exception), 'no calibration records for cells (2,4)')

    def test_ignored_records(self):
        records = corpus() + [
            CalibrationRecord(0, 3, 2, 10, True, True),
            CalibrationRecord(0, 1, 3, 10, True, True),
        ]
        with self.assertLogs('edgesplit.business.predictor', 'WARNING'):
            tables = build_tables(records, two_layer_model(), (2, 4))
        self.assertEqual(tables.sample_count.sum(), 16)

    def test_merge(self):
        records = corpus()
        whole = TableAccumulator(2, (2, 4)).extend(records)
        first = TableAccumulator(2, (2, 4)).extend(records[:7])
        second = TableAccumulator(2, (2, 4)).extend(records[7:])
        merged = first.merge(second)
        sizes = {'raw': 1000, 'encoded': 600}
        self.assertEqual(merged.tables(sizes), whole.tables(sizes))
        with self.assertRaises(TableError):
            first.merge(TableAccumulator(3, (2, 4)))

    def test_percentile_needs_sizes(self):
        accumulator = TableAccumulator(2, (2, 4)).extend(corpus())
        with self.assertRaises(TableError):
            accumulator.tables({'raw': 1, 'encoded': 1}, 'p95')


class SizeStatisticTest(TestCase):

    def test_valid(self):
        self.assertIsNone(parse_size_statistic('mean'))
        self.assertEqual(parse_size_statistic('p95'), 95.0)
        self.assertEqual(parse_size_statistic('p99.5'), 99.5)

    def test_invalid(self):
        for statistic in ('median', 'p', 'p101', '95', None):
            with self.assertRaises(TableError):
                parse_size_statistic(statistic)


class LookupTest(TestCase):

    def setUp(self):
        self.tables = build_tables(corpus(), two_layer_model(), (2, 4))

    def test_cells(self):
        self.assertEqual(lookup_accuracy(self.tables, 1, 2), 0.5)
        self.assertEqual(lookup_size(self.tables, 1, 4), 500.0)

    def test_all_cloud_row(self):
        self.assertEqual(lookup_accuracy(self.tables, 0, 2), 0.0)
        self.assertEqual(lookup_size(self.tables, 0, 2), 600.0)
        self.assertEqual(lookup_size(self.tables, 0, 2, encoded=False), 1000.0)

    def test_out_of_grid(self):
        with self.assertRaises(OutOfGridError):
            lookup_accuracy(self.tables, 3, 2)
        with self.assertRaises(OutOfGridError):
            lookup_size(self.tables, 1, 3)
        with self.assertRaises(OutOfGridError):
            lookup_size(self.tables, -1, 2)

    def test_compare_identical(self):
        report = compare_tables(self.tables, self.tables)
        self.assertEqual(report.max_accuracy_divergence, 0.0)
        self.assertEqual(report.max_size_divergence, 0.0)
        self.assertTrue(np.all(report.size_divergence == 0))
