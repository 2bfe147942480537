# -*- coding: utf-8 -*-

import os
import shutil
import tempfile
from unittest import TestCase

import mock

from edgesplit.business.latency import model_for_devices
from edgesplit.business.planner import plan_scenario
from edgesplit.business.simulator import (
    RequestStream,
    run,
    sweep_accuracy,
)
from edgesplit.data.repository.profile_repository import (
    fixture_path,
    load_scenario,
)
from edgesplit.presentation.reports import (
    accuracy_table,
    amplification_table,
    compression_table,
    csv_bytes,
    decision_text,
    latency_table,
    layer_loss_table,
    plan_change_table,
    request_table,
    save_csv,
    summary_text,
    sweep_table,
)


class ModelReportTest(TestCase):

    def setUp(self):
        self.scenario = load_scenario(
            fixture_path('scenario-toy-measured.json'))

    def test_amplification(self):
        table = amplification_table(self.scenario.model)
        self.assertEqual(len(table['rows']), 6)
        first = table['rows'][0]
        self.assertEqual(first[:4], [1, 'conv1', 16384, 65536])
        self.assertAlmostEqual(first[4], 65536 / 3072.0)
        self.assertEqual(first[5], 32.0)

    def test_compression(self):
        table = compression_table(self.scenario.model, self.scenario.tables)
        self.assertEqual(len(table['rows']), 6 * 4)
        layer, name, bits, feature_bytes, size, ratio = table['rows'][0]
        self.assertEqual((layer, name, bits), (1, 'conv1', 2))
        self.assertEqual(ratio, size / feature_bytes)

    def test_accuracy(self):
        table = accuracy_table(self.scenario.tables)
        self.assertEqual([row[0] for row in table['rows']], [2, 4, 6, 8])
        for _, mean, low, high in table['rows']:
            self.assertLessEqual(low, mean)
            self.assertLessEqual(mean, high)
        means = [row[1] for row in table['rows']]
        self.assertEqual(means, sorted(means, reverse=True))

    def test_layer_loss(self):
        table = layer_loss_table(self.scenario.model, self.scenario.tables, 4)
        self.assertEqual(len(table['rows']), 6)
        self.assertTrue(all(row[2] == 4 for row in table['rows']))

    def test_latency(self):
        latency = model_for_devices(
            self.scenario.model, self.scenario.edge, self.scenario.cloud)
        data = csv_bytes(latency_table(latency))
        lines = data.decode('utf-8').splitlines()
        self.assertEqual(lines[0], 'layer,edge_s,cloud_s,compute_s')
        self.assertEqual(len(lines), 8)
        self.assertTrue(lines[1].startswith('0,0.0,'))


class RunReportTest(TestCase):

    def setUp(self):
        self.scenario = load_scenario(
            fixture_path('scenario-vgg16-tx2.json'))
        self.report = run(self.scenario, RequestStream(count=4))

    def test_request_table(self):
        table = request_table(self.report)
        self.assertEqual(len(table['rows']), 4)
        row = dict(zip(table['header'], table['rows'][0]))
        self.assertEqual(row['split_layer'], 21)
        self.assertIsNone(row['payload_bytes'])
        lines = csv_bytes(table).decode('utf-8').splitlines()
        self.assertIn(',,', lines[1])

    def test_plan_change_table(self):
        table = plan_change_table(self.report)
        self.assertEqual(table['rows'], [[0, 0.0, 1, 21, 1, 300000.0]])

    def test_sweep_table(self):
        rows = sweep_accuracy(
            self.scenario, [0.0, 0.1], RequestStream(count=2))
        table = sweep_table(rows, 'max_loss')
        self.assertEqual(table['header'][0], 'max_loss')
        self.assertEqual(table['rows'][0][0], 0.0)
        self.assertEqual(table['rows'][1][6:], [21, 1])

    def test_summary(self):
        text = summary_text(self.report)
        self.assertIn('scenario: vgg16-tx2', text)
        self.assertIn('requests: 4', text)
        self.assertIn('mean latency: 17.866 ms', text)
        self.assertIn('origin2cloud: 507.373 ms, speedup 28.398x', text)
        self.assertIn('encoded2cloud: 305.613 ms, speedup 17.105x', text)

    def test_save_csv(self):
        directory = tempfile.mkdtemp()
        try:
            path = os.path.join(directory, 'requests.csv')
            save_csv(path, request_table(self.report))
            with open(path, 'rb') as data:
                self.assertEqual(data.read(), csv_bytes(
                    request_table(self.report)))
        finally:
            shutil.rmtree(directory)


class DecisionTextTest(TestCase):

    def setUp(self):
        self.scenario = load_scenario(
            fixture_path('scenario-vgg16-tx2.json'))

    def test_split(self):
        text = decision_text(plan_scenario(self.scenario), epoch=2)
        lines = text.splitlines()
        self.assertEqual(lines[0], 'decision: split 21 at 1 bits')
        self.assertEqual(lines[1], 'bandwidth: 300KBps')
        self.assertIn('total:    17.866 ms', lines)
        self.assertEqual(lines[-1], 'epoch: 2')

    def test_all_cloud(self):
        text = decision_text(plan_scenario(self.scenario, 1e7))
        self.assertTrue(text.startswith(
            'decision: split 0 (upload input, run all layers in the cloud)'))
        self.assertNotIn('epoch', text)

    def test_without_bandwidth(self):
        decision = mock.Mock(
            is_all_cloud=False, split_layer=3, bit_depth=4, edge_s=0.001,
            trans_s=0.002, cloud_s=0.003, total_s=0.006,
            predicted_accuracy_loss=0.01, bandwidth=None)
        lines = decision_text(decision).splitlines()
        self.assertEqual(len(lines), 6)
        self.assertEqual(lines[-1], 'predicted accuracy loss: 0.0100')
