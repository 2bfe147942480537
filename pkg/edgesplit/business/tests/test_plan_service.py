# -*- coding: utf-8 -*-

from unittest import TestCase

import mock

from edgesplit.business.plan_service import PlanService
from edgesplit.data.repository.profile_repository import (
    fixture_path,
    load_scenario,
)


class PlanServiceTest(TestCase):

    def setUp(self):
        self.scenario = load_scenario(
            fixture_path('scenario-vgg16-tx2.json'))
        self.loader = mock.Mock(return_value=self.scenario)
        self.service = PlanService(self.loader)

    def test_loads_once(self):
        self.assertEqual(self.service.plan().cell, (21, 1))
        self.assertEqual(self.service.plan(1e7).cell, (0, 0))
        self.assertIs(self.service.scenario, self.scenario)
        self.loader.assert_called_once_with()

    def test_max_loss(self):
        self.assertEqual(self.service.plan(max_loss=0.0).cell, (21, 8))

    def test_latency_model(self):
        self.assertEqual(self.service.latency_model().n_layers, 21)

    def test_status_without_cloud(self):
        self.assertEqual(self.service.status(), {
            'scenario': 'vgg16-tx2',
            'model': 'VGG16',
            'epoch': None,
            'split_layer': None,
            'bit_depth': None,
            'cloud': None,
        })

    def test_status_with_cloud(self):
        cloud_service = mock.Mock()
        cloud_service.plan.snapshot.return_value = (3, 21, 1)
        cloud_service.counters.as_dict.return_value = {'blocks': 7}
        self.service.cloud_service = cloud_service
        status = self.service.status()
        self.assertEqual(status['epoch'], 3)
        self.assertEqual(status['split_layer'], 21)
        self.assertEqual(status['bit_depth'], 1)
        self.assertEqual(status['cloud'], {'blocks': 7})

    def test_loader_errors_propagate(self):
        service = PlanService(mock.Mock(side_effect=IOError('missing')))
        with self.assertRaises(IOError):
            service.plan()
