# -*- coding: utf-8 -*-

import json
import os
import shutil
import tempfile
from unittest import TestCase

from edgesplit.data.exceptions import (
    ProfileParseError,
    ProfileValidationError,
)
from edgesplit.data.profiles import validate_scenario
from edgesplit.data.repository.profile_repository import (
    dump_device_profile,
    dump_model_profile,
    fixture_path,
    load_device_profile,
    load_generator_spec,
    load_model_profile,
    load_scenario,
    parse_model_profile,
    read_layer_timings,
    save_model_profile,
    write_layer_timings,
)


VGG16_FMACS = 15476385792


class TempDirTestCase(TestCase):

    def setUp(self):
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def write(self, name, content):
        path = os.path.join(self.directory, name)
        with open(path, 'w') as output:
            if isinstance(content, dict):
                json.dump(content, output)
            else:
                output.write(content)
        return path


class ModelProfileRepositoryTest(TempDirTestCase):

    def test_vgg16_fixture(self):
        model = load_model_profile(fixture_path('model-vgg16.json'))
        self.assertEqual(model.model_name, 'VGG16')
        self.assertEqual(model.n_points, 21)
        self.assertEqual(model.total_flops, VGG16_FMACS)
        self.assertEqual(model.input_bytes_raw, 150528)
        self.assertEqual(model.input_bytes_encoded, 90000)
        self.assertEqual(model.input_shape, (3, 224, 224))
        self.assertEqual(model.point(1).output_shape, (64, 224, 224))
        self.assertEqual(model.point(21).name, 'fc8')

    def test_other_fixtures(self):
        resnet = load_model_profile(fixture_path('model-resnet50.json'))
        self.assertEqual(resnet.n_points, 18)
        toy = load_model_profile(fixture_path('model-toy.json'))
        self.assertEqual(toy.n_points, 6)

    def test_dump_and_parse(self):
        model = load_model_profile(fixture_path('model-toy.json'))
        self.assertEqual(parse_model_profile(dump_model_profile(model)), model)
        path = os.path.join(self.directory, 'model.json')
        save_model_profile(model, path)
        self.assertEqual(load_model_profile(path), model)

    def test_syntax_error_location(self):
        path = self.write('broken.json', '{\n  "schema_version": 1,\n  oops\n}')
        with self.assertRaises(ProfileParseError) as context:
            load_model_profile(path)
        self.assertEqual(context.exception.line, 3)
        self.assertEqual(context.exception.path, path)

    def test_schema_error_field(self):
        document = json.loads(dump_model_profile(
            load_model_profile(fixture_path('model-toy.json'))))
        document['points'][1]['flops'] = -5
        path = self.write('negative.json', document)
        with self.assertRaises(ProfileParseError) as context:
            load_model_profile(path)
        self.assertEqual(context.exception.field, 'points.1.flops')

    def test_missing_schema_version(self):
        document = json.loads(dump_model_profile(
            load_model_profile(fixture_path('model-toy.json'))))
        del document['schema_version']
        with self.assertRaises(ProfileParseError) as context:
            load_model_profile(self.write('old.json', document))
        self.assertEqual(context.exception.field, 'schema_version')

    def test_non_contiguous_index(self):
        document = json.loads(dump_model_profile(
            load_model_profile(fixture_path('model-toy.json'))))
        document['points'][2]['index'] = 7
        with self.assertRaises(ProfileValidationError) as context:
            load_model_profile(self.write('gap.json', document))
        self.assertEqual(str(context.exception), 'non-contiguous index at 7')

    def test_missing_file(self):
        with self.assertRaises(ProfileParseError):
            load_model_profile(os.path.join(self.directory, 'missing.json'))


class DeviceProfileRepositoryTest(TempDirTestCase):

    def test_analytic_fixture(self):
        device = load_device_profile(fixture_path('device-tx2.json'))
        self.assertTrue(device.is_analytic)
        self.assertEqual(device.flops_per_second, 2e12)
        self.assertEqual(device.fit_scale, 1.1176)

    def test_measured_timings_file(self):
        device = load_device_profile(fixture_path('device-k620.json'))
        self.assertFalse(device.is_analytic)
        self.assertEqual(len(device.prefix_latency), 6)
        self.assertAlmostEqual(device.prefix_latency[0], 0.0021)
        self.assertAlmostEqual(device.prefix_latency[-1], 0.0098)

    def test_measured_inline(self):
        device = load_device_profile(fixture_path('device-1080ti.json'))
        self.assertEqual(device.prefix_latency[-1], 0.00096)

    def test_dump(self):
        device = load_device_profile(fixture_path('device-1080ti.json'))
        path = self.write('device.json', dump_device_profile(device))
        self.assertEqual(load_device_profile(path), device)

    def test_timings_round_trip(self):
        path = os.path.join(self.directory, 'timings.csv')
        write_layer_timings(path, [0.25, 0.5, 0.125])
        self.assertEqual(read_layer_timings(path), (0.25, 0.5, 0.125))

    def test_timings_gap(self):
        path = self.write('timings.csv', 'layer,seconds\n1,0.1\n3,0.2\n')
        with self.assertRaises(ProfileParseError) as context:
            read_layer_timings(path)
        self.assertIn('non-contiguous index at 3', str(context.exception))

    def test_timings_bad_row(self):
        path = self.write('timings.csv', 'layer,seconds\n1,0.1\n2,slow\n')
        with self.assertRaises(ProfileParseError) as context:
            read_layer_timings(path)
        self.assertEqual(context.exception.line, 3)


class ScenarioRepositoryTest(TempDirTestCase):

    def test_shipped_scenarios_are_consistent(self):
        for name in ('vgg16-tx2', 'vgg16-tk1', 'resnet50-step',
                     'toy-measured'):
            scenario = load_scenario(
                fixture_path('scenario-{0}.json'.format(name)))
            self.assertEqual(scenario.name, name)
            self.assertEqual(validate_scenario(scenario), [], name)

    def test_vgg16_tx2(self):
        scenario = load_scenario(fixture_path('scenario-vgg16-tx2.json'))
        self.assertEqual(scenario.model.model_name, 'VGG16')
        self.assertEqual(scenario.bandwidth_trace, ((0.0, 300000.0),))
        self.assertEqual(scenario.accuracy_budget, 0.1)
        self.assertEqual(scenario.tables.n_layers, 21)

    def test_tables_override(self):
        scenario = load_scenario(
            fixture_path('scenario-vgg16-tx2.json'),
            fixture_path('tables-resnet50.json'))
        self.assertEqual(scenario.tables.model_name, 'ResNet50')
        diagnostics = validate_scenario(scenario)
        self.assertEqual(len(diagnostics), 1)
        self.assertIn('N=18', diagnostics[0])

    def test_missing_reference(self):
        path = self.write('scenario.json', {
            'schema_version': 1,
            'model': 'nowhere.json',
            'edge': fixture_path('device-tx2.json'),
            'cloud': fixture_path('device-cloud.json'),
            'tables': fixture_path('tables-vgg16.json'),
            'bandwidth_trace': [[0, 1000]],
            'accuracy_budget': 0.1,
        })
        with self.assertRaises(ProfileParseError):
            load_scenario(path)


class GeneratorSpecRepositoryTest(TempDirTestCase):

    def test_fixture(self):
        spec = load_generator_spec(fixture_path('generator-default.json'))
        self.assertEqual(spec.seed, 7)
        self.assertEqual(spec.max_elements, 4096)
        self.assertEqual(spec.flag_sampling, 'stratified')

    def test_defaults(self):
        spec = load_generator_spec(self.write('spec.json', {
            'schema_version': 1,
            'seed': 3,
            'sparsity': [0.5, 0.9],
        }))
        self.assertEqual(spec.sparsity, (0.5, 0.9))
        self.assertEqual(spec.default_sparsity, 0.6)
        self.assertIsNone(spec.max_elements)

    def test_invalid(self):
        with self.assertRaises(ProfileParseError):
            load_generator_spec(self.write('spec.json', {
                'schema_version': 1,
                'seed': 3,
                'flag_sampling': 'sobol',
            }))
