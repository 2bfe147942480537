# -*- coding: utf-8 -*-

from unittest import TestCase

import mock

from edgesplit.data.exceptions import ProfileValidationError
from edgesplit.data.profiles import (
    ANALYTIC,
    MEASURED,
    DecouplingPoint,
    DeviceProfile,
    ModelProfile,
    Scenario,
    validate_scenario,
)


def make_point(index, flops=100, shape=(2, 3)):
    elements = 1
    for dim in shape:
        elements *= dim
    return DecouplingPoint(
        index=index,
        name='layer{0}'.format(index),
        flops=flops,
        output_elements=elements,
        output_shape=shape)


def make_model(flops=(100, 200, 300)):
    return ModelProfile(
        model_name='tiny',
        input_bytes_raw=1000,
        input_bytes_encoded=600,
        points=tuple(
            make_point(index, value)
            for index, value in enumerate(flops, start=1)))


def make_tables(n_layers=3, empty=None):
    tables = mock.Mock()
    tables.n_layers = n_layers
    tables.bit_depths = (2, 4)
    tables.empty_cells.return_value = empty or []
    return tables


class DecouplingPointTest(TestCase):

    def test_valid(self):
        point = make_point(1, shape=(4, 5, 6))
        self.assertEqual(point.output_elements, 120)

    def test_element_count_must_match_shape(self):
        with self.assertRaises(ProfileValidationError) as context:
            DecouplingPoint(
                index=2, name='conv', flops=1, output_elements=7,
                output_shape=(2, 3))
        self.assertEqual(context.exception.point_index, 2)

    def test_flops_must_be_positive(self):
        with self.assertRaises(ProfileValidationError):
            make_point(1, flops=0)


class ModelProfileTest(TestCase):

    def test_flop_sums(self):
        model = make_model()
        self.assertEqual(model.n_points, 3)
        self.assertEqual(model.total_flops, 600)
        self.assertEqual(
            [model.prefix_flops(i) for i in range(4)], [0, 100, 300, 600])
        self.assertEqual(
            [model.suffix_flops(i) for i in range(4)], [600, 500, 300, 0])
        for i in range(4):
            self.assertEqual(
                model.prefix_flops(i) + model.suffix_flops(i),
                model.total_flops)

    def test_input_shape_default(self):
        self.assertEqual(make_model().input_shape, (1000,))

    def test_non_contiguous_index(self):
        points = (make_point(1), make_point(2), make_point(4))
        with self.assertRaises(ProfileValidationError) as context:
            ModelProfile('gap', 1000, 600, points)
        self.assertEqual(str(context.exception), 'non-contiguous index at 4')
        self.assertEqual(context.exception.point_index, 4)

    def test_empty_model(self):
        with self.assertRaises(ProfileValidationError):
            ModelProfile('empty', 1000, 600, ())

    def test_encoded_input_larger_than_raw(self):
        with self.assertRaises(ProfileValidationError):
            ModelProfile('odd', 100, 600, (make_point(1),))

    def test_point_lookup(self):
        model = make_model()
        self.assertEqual(model.point(2).name, 'layer2')
        with self.assertRaises(IndexError):
            model.point(0)
        with self.assertRaises(IndexError):
            model.point(4)


class DeviceProfileTest(TestCase):

    def test_analytic_needs_throughput(self):
        device = DeviceProfile('tx2', ANALYTIC, 2e12, 1.1176)
        self.assertTrue(device.is_analytic)
        with self.assertRaises(ProfileValidationError):
            DeviceProfile('tx2', ANALYTIC, None, 1.1176)
        with self.assertRaises(ProfileValidationError):
            DeviceProfile('tx2', ANALYTIC, 2e12, 0)

    def test_measured_vector(self):
        device = DeviceProfile(
            'k620', MEASURED, prefix_latency=(0.5, 1.5, 1.75))
        self.assertFalse(device.is_analytic)
        self.assertEqual(device.layer_latency(), (0.5, 1.0, 0.25))

    def test_measured_vector_must_not_decrease(self):
        with self.assertRaises(ProfileValidationError) as context:
            DeviceProfile('k620', MEASURED, prefix_latency=(0.5, 0.25))
        self.assertEqual(context.exception.point_index, 2)
        with self.assertRaises(ProfileValidationError):
            DeviceProfile('k620', MEASURED)

    def test_unknown_mode(self):
        with self.assertRaises(ProfileValidationError):
            DeviceProfile('gpu', 'guessed', 1e12, 1)


class ScenarioTest(TestCase):

    def setUp(self):
        self.scenario = Scenario(
            model=make_model(),
            edge=DeviceProfile('edge', ANALYTIC, 1e12, 1),
            cloud=DeviceProfile('cloud', ANALYTIC, 1e13, 1),
            bandwidth_trace=((0.0, 1000.0), (2.0, 500.0), (5.0, 3000.0)),
            accuracy_budget=0.1,
            tables=make_tables())

    def test_bandwidth_at(self):
        self.assertEqual(self.scenario.bandwidth_at(0), 1000.0)
        self.assertEqual(self.scenario.bandwidth_at(1.99), 1000.0)
        self.assertEqual(self.scenario.bandwidth_at(2.0), 500.0)
        self.assertEqual(self.scenario.bandwidth_at(100), 3000.0)

    def test_mean_bandwidth(self):
        self.assertAlmostEqual(self.scenario.mean_bandwidth, 1500.0)

    def test_replace(self):
        changed = self.scenario.replace(accuracy_budget=0.5)
        self.assertEqual(changed.accuracy_budget, 0.5)
        self.assertEqual(self.scenario.accuracy_budget, 0.1)
        self.assertIs(changed.model, self.scenario.model)

    def test_valid(self):
        self.assertEqual(validate_scenario(self.scenario), [])

    def test_negative_budget(self):
        diagnostics = validate_scenario(
            self.scenario.replace(accuracy_budget=-0.1))
        self.assertEqual(diagnostics, [u'accuracy budget must be ≥ 0'])

    def test_bad_trace(self):
        diagnostics = validate_scenario(self.scenario.replace(
            bandwidth_trace=((1.0, 100.0), (1.0, 0.0))))
        self.assertEqual(len(diagnostics), 3)
        self.assertIn('bandwidth trace must start at time 0', diagnostics)
        self.assertIn('bandwidth must be > 0 (trace entry 1)', diagnostics)

    def test_table_dimensions(self):
        diagnostics = validate_scenario(
            self.scenario.replace(tables=make_tables(n_layers=5)))
        self.assertEqual(len(diagnostics), 1)
        self.assertIn('N=5', diagnostics[0])
        self.assertIn('N=3', diagnostics[0])

    def test_table_coverage(self):
        diagnostics = validate_scenario(
            self.scenario.replace(tables=make_tables(empty=[(2, 4)])))
        self.assertEqual(
            diagnostics, ['lookup tables have no samples for cells (2,4)'])

    def test_measured_device_length(self):
        edge = DeviceProfile('k620', MEASURED, prefix_latency=(0.1, 0.2))
        diagnostics = validate_scenario(self.scenario.replace(edge=edge))
        self.assertEqual(len(diagnostics), 1)
        self.assertIn('2 timing entries, model has 3', diagnostics[0])
