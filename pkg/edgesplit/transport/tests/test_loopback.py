# -*- coding: utf-8 -*-
"""
Runs edge agents against a cloud service on the loopback interface.
"""

from dataclasses import replace
import socket
import time
from unittest import TestCase

import numpy as np

from edgesplit.business.codec import encode
from edgesplit.business.planner import (
    AdaptationController,
    decision_record,
)
from edgesplit.business.quantizer import FeatureMap, quantize
from edgesplit.business.synthetic import GeneratorSpec
from edgesplit.data.repository.profile_repository import (
    fixture_path,
    load_scenario,
)
from edgesplit.transport import wire
from edgesplit.transport.cloud_service import CloudService, PlanState
from edgesplit.transport.edge_agent import EdgeAgent
from edgesplit.transport.exceptions import WireError
from edgesplit.transport.pipeline import local_digest


SLOW = 200000.0
FAST = 1e9


def free_port():
    sock = socket.socket()
    sock.bind(('127.0.0.1', 0))
    port = sock.getsockname()[1]
    sock.close()
    return port


def exchange(connection, message):
    wire.send_message(connection, message)
    return wire.receive_message(connection)


def plan_sync(scenario, bandwidth, epoch):
    """
    A PLAN_SYNC message carrying the plan of a scenario at a bandwidth.
    """
    controller = AdaptationController.for_scenario(scenario)
    controller.replan(bandwidth)
    decision, _ = controller.current()
    return wire.WireMessage(
        wire.PLAN_SYNC, epoch=epoch,
        body=decision_record(decision, epoch).encode('utf-8'))


class LoopbackTestCase(TestCase):

    def setUp(self):
        self.scenario = load_scenario(
            fixture_path('scenario-toy-measured.json'))
        self.spec = GeneratorSpec(seed=7, max_elements=1024)
        self.service = CloudService('127.0.0.1', 0, time_scale=0).start()
        self.agents = []

    def tearDown(self):
        for agent in self.agents:
            agent.stop()
        self.service.stop()

    def make_agent(self, port=None, **kwargs):
        kwargs.setdefault('time_scale', 0)
        kwargs.setdefault('retry_delay', 0.01)
        host, service_port = self.service.address
        agent = EdgeAgent(
            host, port or service_port,
            AdaptationController.for_scenario(self.scenario),
            self.scenario.model, self.spec, **kwargs)
        self.agents.append(agent)
        return agent

    def assert_digests(self, results):
        for result in results:
            self.assertEqual(
                result.digest,
                local_digest(
                    self.spec, self.scenario.model, result.split_layer,
                    result.bit_depth, result.request_id))


class EdgeCloudTest(LoopbackTestCase):

    def test_plan_change_mid_run(self):
        agent = self.make_agent()
        started = time.perf_counter()
        results = agent.run(100, [SLOW] * 50 + [FAST] * 50)
        self.assertLess(time.perf_counter() - started, 30.0)
        self.assertEqual(
            [(result.split_layer, result.bit_depth) for result in results],
            [(5, 4)] * 50 + [(0, 0)] * 50)
        self.assertEqual(
            [result.epoch for result in results], [1] * 50 + [2] * 50)
        self.assertEqual(
            [result.request_id for result in results], list(range(100)))
        self.assert_digests(results)
        self.assertEqual(agent.stats['violations'], 0)
        self.assertEqual(agent.stats['requests'], 100)
        self.assertEqual(agent.stats['syncs'], 2)
        self.assertEqual(self.service.plan.snapshot(), (2, 0, 0))
        counters = self.service.counters.as_dict()
        self.assertEqual(counters['requests'], 100)
        self.assertEqual(counters['errors'], 0)
        self.assertIn('requests=100', self.service.stats_line())
        self.assertIn('violations=0', agent.stats_line())

    def test_later_agent_supersedes(self):
        first = self.make_agent()
        second = self.make_agent()
        first.process(0, SLOW)
        second.process(1, SLOW)
        self.assertGreater(second.wire_epoch, first.wire_epoch)
        result = first.process(2)
        self.assertEqual(result.attempts, 2)
        self.assertEqual(result.epoch, 3)
        self.assertEqual(first.stats['retries'], 1)
        self.assertEqual(first.stats['violations'], 0)
        self.assert_digests(first.results + second.results)

    def test_plan_change_marks_agent_for_sync(self):
        agent = self.make_agent()
        self.assertTrue(agent.needs_sync)
        agent.process(0, SLOW)
        self.assertFalse(agent.needs_sync)
        agent.controller.replan(FAST)
        self.assertTrue(agent.needs_sync)
        syncs = agent.stats['syncs']
        result = agent.process(1)
        self.assertEqual(agent.stats['syncs'], syncs + 1)
        self.assertEqual((result.epoch, result.split_layer), (2, 0))
        self.assertEqual(self.service.plan.snapshot(), (2, 0, 0))

    def test_other_plan_under_same_epoch(self):
        agent = self.make_agent()
        agent.process(0, SLOW)
        connection = socket.create_connection(self.service.address)
        try:
            reply = exchange(connection, plan_sync(
                self.scenario, FAST, agent.wire_epoch))
            self.assertEqual(reply.json()['split_layer'], 5)
            result = agent.process(1)
            self.assertEqual((result.split_layer, result.attempts), (5, 1))
            exchange(connection, plan_sync(self.scenario, SLOW, 2))
        finally:
            connection.close()
        self.assertEqual(self.service.plan.snapshot(), (2, 5, 4))
        result = agent.process(2, FAST)
        self.assertEqual((result.epoch, result.split_layer), (3, 0))
        self.assertEqual(self.service.plan.snapshot(), (3, 0, 0))
        self.assertEqual(agent.stats['violations'], 0)
        self.assert_digests(agent.results)

    def test_cloud_restart(self):
        agent = self.make_agent()
        agent.process(0, SLOW)
        host, port = self.service.address
        self.service.stop()
        self.service = CloudService(host, port, time_scale=0).start()
        result = agent.process(1)
        self.assertGreater(result.attempts, 1)
        self.assertEqual(agent.stats['reconnects'], 1)
        self.assertEqual(self.service.plan.snapshot()[0], agent.wire_epoch)
        self.assert_digests(agent.results)

    def test_no_service(self):
        agent = self.make_agent(port=free_port(), max_retries=1)
        with self.assertRaises(WireError):
            agent.process(0, SLOW)
        self.assertEqual(agent.stats['retries'], 1)

    def test_unresponsive_service(self):
        listener = socket.socket()
        listener.bind(('127.0.0.1', 0))
        listener.listen(1)
        try:
            agent = self.make_agent(
                port=listener.getsockname()[1], sync_timeout=0.2,
                max_retries=0)
            with self.assertRaises(WireError):
                agent.process(0, SLOW)
        finally:
            listener.close()


class CloudServiceTest(LoopbackTestCase):

    def test_epoch_mismatch(self):
        connection = socket.create_connection(self.service.address)
        try:
            hello = exchange(connection, wire.WireMessage(wire.HELLO))
            self.assertEqual(hello.json()['epoch'], 0)
            reply = exchange(connection, wire.WireMessage(
                wire.FEATURE_BLOCK, epoch=5, request_id=3, body=b''))
        finally:
            connection.close()
        self.assertEqual(reply.message_type, wire.ERROR)
        self.assertEqual(reply.request_id, 3)
        self.assertEqual(
            reply.json(), {'reason': 'epoch mismatch', 'epoch': 0})
        self.assertEqual(self.service.counters.as_dict()['errors'], 1)

    def test_malformed_block(self):
        reply = self.service.dispatch(wire.WireMessage(
            wire.FEATURE_BLOCK, epoch=0, body=b'garbage'))
        self.assertEqual(reply.message_type, wire.ERROR)
        self.assertIn('truncated payload', reply.json()['reason'])

    def test_out_of_range_headers(self):
        block = encode(
            quantize(FeatureMap.from_array(np.zeros((2, 3))), 4), 1)
        shape = (40000, 40000, 40000)
        cases = [
            (replace(block, bit_depth=0), 'bit-depth 0'),
            (replace(block, v_min=5.0, v_max=1.0), 'exceeds v_max'),
            (replace(block, shape=shape, symbol_count=40000 ** 3),
             'decoder limit'),
        ]
        for broken, reason in cases:
            reply = self.service.dispatch(wire.WireMessage(
                wire.FEATURE_BLOCK, epoch=0, request_id=4,
                body=broken.to_bytes()))
            self.assertEqual(reply.message_type, wire.ERROR)
            self.assertEqual(reply.request_id, 4)
            self.assertIn(reason, reply.json()['reason'])
        self.assertEqual(self.service.counters.as_dict()['errors'], 3)

    def test_connection_survives_malformed_block(self):
        block = encode(
            quantize(FeatureMap.from_array(np.zeros((2, 3))), 4), 1)
        connection = socket.create_connection(self.service.address)
        try:
            reply = exchange(connection, wire.WireMessage(
                wire.FEATURE_BLOCK, epoch=0,
                body=replace(block, bit_depth=0).to_bytes()))
            self.assertEqual(reply.message_type, wire.ERROR)
            hello = exchange(connection, wire.WireMessage(wire.HELLO))
        finally:
            connection.close()
        self.assertEqual(hello.message_type, wire.HELLO)

    def test_malformed_plan_sync(self):
        with self.assertRaises(WireError):
            self.service.dispatch(
                wire.WireMessage(wire.PLAN_SYNC, epoch=1, body=b'{}'))

    def test_unexpected_message(self):
        with self.assertRaises(WireError):
            self.service.dispatch(wire.WireMessage(wire.RESULT))


class PlanStateTest(TestCase):

    def test_older_epochs_are_ignored(self):
        state = PlanState()
        self.assertEqual(state.snapshot(), (0, None, None))
        self.assertEqual(state.synchronize(2, 5, 4), (2, 5, 4))
        self.assertEqual(state.synchronize(1, 0, 0), (2, 5, 4))
        self.assertEqual(state.synchronize(3, 0, 0), (3, 0, 0))

    def test_same_epoch_keeps_first_plan(self):
        state = PlanState()
        self.assertEqual(state.synchronize(5, 3, 4), (5, 3, 4))
        self.assertEqual(state.synchronize(5, 7, 8), (5, 3, 4))
        self.assertEqual(state.synchronize(5, 3, 4), (5, 3, 4))
        self.assertEqual(state.synchronize(6, 7, 8), (6, 7, 8))
