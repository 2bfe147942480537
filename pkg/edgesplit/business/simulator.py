# -*- coding: utf-8 -*-
"""
Replays request streams through a scenario.

The simulation runs on a simpy environment. Requests arrive at a fixed
interval and are served one after the other: at the start of its service a
request samples the bandwidth trace, asks the adaptation controller for the
plan and then spends the edge, transmission and cloud time of the plan.

Two fidelity modes are reported side by side:

- table mode: the transmitted bytes are the predicted sizes of the tables
- payload mode: the bytes are the encoded size of a generated feature map

The baselines upload the raw or the encoded input and run the whole model in
the cloud, at the same bandwidth as the request.
"""

from collections import namedtuple
from dataclasses import dataclass, replace
import logging

import numpy as np
import simpy

from edgesplit.business.codec import size_breakdown
from edgesplit.business.exceptions import (
    LatencyModelError,
    SimulationError,
)
from edgesplit.business.latency import model_for_devices
from edgesplit.business.planner import (
    AdaptationController,
    EXHAUSTIVE,
    baseline_decision,
)
from edgesplit.business.quantizer import quantize
from edgesplit.business.synthetic import (
    GeneratorSpec,
    extrapolated_size,
    gen_feature_map,
)
from edgesplit.data.profiles import validate_scenario


LOG = logging.getLogger(__name__)

ORIGIN2CLOUD = 'origin2cloud'
ENCODED2CLOUD = 'encoded2cloud'


@dataclass(frozen=True)
class RequestStream(object):
    """
    The requests replayed by a simulation run.

    Attributes:
        count: The number of requests per iteration, > 0.
        inter_arrival: Seconds between request arrivals. 0 serves the
            requests back to back.
        iterations: The number of iterations, the report averages the
            per-iteration means.
        rtt: A fixed round trip time added to every transmission.
        payload_spec: Optional. A GeneratorSpec enabling payload mode.
    """

    count: int = 100
    inter_arrival: float = 0.0
    iterations: int = 1
    rtt: float = 0.0
    payload_spec: GeneratorSpec = None

    def __post_init__(self):
        if self.count <= 0:
            raise SimulationError(['request count must be > 0'])
        if self.iterations <= 0:
            raise SimulationError(['iterations must be > 0'])
        if self.inter_arrival < 0 or self.rtt < 0:
            raise SimulationError(
                ['inter-arrival time and rtt must be >= 0'])


@dataclass(frozen=True)
class RequestRecord(object):
    """
    The latency breakdown of one simulated request.
    """

    iteration: int
    request_id: int
    start_s: float
    bandwidth: float
    epoch: int
    split_layer: int
    bit_depth: int
    edge_s: float
    trans_s: float
    cloud_s: float
    predicted_bytes: float
    origin2cloud_s: float
    encoded2cloud_s: float
    payload_bytes: int = None
    payload_trans_s: float = None

    @property
    def total_s(self):
        return self.edge_s + self.trans_s + self.cloud_s

    @property
    def payload_total_s(self):
        if self.payload_trans_s is None:
            return None
        return self.edge_s + self.payload_trans_s + self.cloud_s


PlanChange = namedtuple(
    'PlanChange',
    ['iteration', 'time_s', 'epoch', 'split_layer', 'bit_depth', 'bandwidth'])


def _mean_of_iterations(records, value):
    means = {}
    for record in records:
        means.setdefault(record.iteration, []).append(value(record))
    return float(np.mean([np.mean(values) for values in means.values()]))


@dataclass(frozen=True)
class RunReport(object):
    """
    The outcome of a simulation run.

    Attributes:
        scenario_name: The name of the scenario.
        records: The RequestRecord of every request.
        plan_changes: The PlanChange of every new plan epoch.
    """

    scenario_name: str
    records: tuple
    plan_changes: tuple

    @property
    def mean_total_s(self):
        """
        The mean of the per-iteration mean latencies.
        """
        return _mean_of_iterations(self.records, lambda r: r.total_s)

    def percentile_total_s(self, percentile):
        return float(np.percentile(
            [record.total_s for record in self.records], percentile))

    @property
    def payload_mean_total_s(self):
        if self.records[0].payload_trans_s is None:
            return None
        return _mean_of_iterations(self.records, lambda r: r.payload_total_s)

    @property
    def baselines(self):
        """
        The mean latencies of the baselines.
        """
        return {
            ORIGIN2CLOUD: _mean_of_iterations(
                self.records, lambda r: r.origin2cloud_s),
            ENCODED2CLOUD: _mean_of_iterations(
                self.records, lambda r: r.encoded2cloud_s),
        }

    @property
    def speedups(self):
        """
        The baseline mean latencies divided by the planned mean latency.
        """
        mean = self.mean_total_s
        return dict(
            (name, baseline / mean)
            for name, baseline in self.baselines.items())

    @property
    def first_decision(self):
        record = self.records[0]
        return record.split_layer, record.bit_depth


class _Replay(object):
    """
    The simpy processes of one iteration.
    """

    def __init__(self, env, scenario, stream, controller, iteration,
                 records, plan_changes):
        self.env = env
        self.scenario = scenario
        self.stream = stream
        self.controller = controller
        self.iteration = iteration
        self.records = records
        self.plan_changes = plan_changes
        self.pipeline = simpy.Resource(env, capacity=1)

    def arrivals(self):
        for request_id in range(self.stream.count):
            self.env.process(self.request(request_id))
            if self.stream.inter_arrival:
                yield self.env.timeout(self.stream.inter_arrival)

    def request(self, request_id):
        with self.pipeline.request() as slot:
            yield slot
            record = self.serve(request_id)
            self.records.append(record)
            yield self.env.timeout(record.edge_s)
            yield self.env.timeout(record.trans_s)
            yield self.env.timeout(record.cloud_s)

    def serve(self, request_id):
        now = self.env.now
        bandwidth = self.scenario.bandwidth_at(now)
        previous_epoch = self.controller.epoch
        self.controller.replan(bandwidth)
        decision, epoch = self.controller.current()
        if epoch != previous_epoch:
            self.plan_changes.append(PlanChange(
                self.iteration, now, epoch, decision.split_layer,
                decision.bit_depth, bandwidth))
        latency = self.controller.latency
        tables = self.scenario.tables
        rtt = self.stream.rtt
        payload_bytes = payload_trans_s = None
        if self.stream.payload_spec is not None:
            sample_id = self.iteration * self.stream.count + request_id
            payload_bytes = payload_size(
                self.stream.payload_spec, self.scenario.model, decision,
                sample_id)
            payload_trans_s = payload_bytes / bandwidth + rtt
        return RequestRecord(
            iteration=self.iteration,
            request_id=request_id,
            start_s=now,
            bandwidth=bandwidth,
            epoch=epoch,
            split_layer=decision.split_layer,
            bit_depth=decision.bit_depth,
            edge_s=decision.edge_s,
            trans_s=decision.trans_s,
            cloud_s=decision.cloud_s,
            predicted_bytes=decision.predicted_bytes,
            origin2cloud_s=baseline_decision(
                latency, tables, bandwidth, False, rtt).total_s,
            encoded2cloud_s=baseline_decision(
                latency, tables, bandwidth, True, rtt).total_s,
            payload_bytes=payload_bytes,
            payload_trans_s=payload_trans_s)


def payload_size(spec, model, decision, sample_id):
    """
    The encoded bytes of the feature map a decision transmits for a sample.
    The all-cloud split transmits the encoded input.
    """
    if decision.is_all_cloud:
        return model.input_bytes_encoded
    point = model.point(decision.split_layer)
    feature_map = gen_feature_map(spec, point, sample_id)
    header, payload = size_breakdown(quantize(feature_map, decision.bit_depth))
    return extrapolated_size(
        header, payload, point.output_shape, feature_map.shape)


def check_scenario(scenario):
    """
    Raises:
        SimulationError: The scenario is inconsistent. The error carries the
            diagnostics.
    """
    diagnostics = validate_scenario(scenario)
    if diagnostics:
        raise SimulationError(diagnostics)


def run(scenario, stream=None, solver=EXHAUSTIVE):
    """
    Simulates a request stream.

    Args:
        scenario: The Scenario.
        stream: Optional. The RequestStream, 100 back to back requests by
            default.
        solver: The planner solver, ``exhaustive`` or ``bnb``.

    Returns:
        The RunReport.

    Raises:
        SimulationError: The scenario is inconsistent.
    """
    check_scenario(scenario)
    stream = stream or RequestStream()
    controller = AdaptationController(
        scenario.model,
        model_for_devices(scenario.model, scenario.edge, scenario.cloud),
        scenario.tables,
        scenario.accuracy_budget,
        solver=solver,
        rtt=stream.rtt)
    records = []
    plan_changes = []
    for iteration in range(stream.iterations):
        env = simpy.Environment()
        replay = _Replay(
            env, scenario, stream, controller, iteration, records,
            plan_changes)
        env.process(replay.arrivals())
        env.run()
    report = RunReport(
        scenario_name=scenario.name,
        records=tuple(records),
        plan_changes=tuple(plan_changes))
    LOG.info(
        'simulated %d requests of scenario %s: mean %.3f ms, %d plan epochs',
        len(records), scenario.name, report.mean_total_s * 1e3,
        controller.epoch)
    return report


SweepRow = namedtuple(
    'SweepRow',
    ['value', 'mean_total_s', 'origin2cloud_s', 'encoded2cloud_s',
     'speedup_origin2cloud', 'speedup_encoded2cloud', 'split_layer',
     'bit_depth'])


def _sweep_row(value, report):
    baselines = report.baselines
    speedups = report.speedups
    split_layer, bit_depth = report.first_decision
    return SweepRow(
        value=value,
        mean_total_s=report.mean_total_s,
        origin2cloud_s=baselines[ORIGIN2CLOUD],
        encoded2cloud_s=baselines[ENCODED2CLOUD],
        speedup_origin2cloud=speedups[ORIGIN2CLOUD],
        speedup_encoded2cloud=speedups[ENCODED2CLOUD],
        split_layer=split_layer,
        bit_depth=bit_depth)


def sweep_accuracy(scenario, budgets, stream=None, solver=EXHAUSTIVE):
    """
    Runs the scenario for every accuracy budget.

    Returns:
        One SweepRow per budget, ``value`` is the budget.
    """
    return [
        _sweep_row(budget, run(
            scenario.replace(accuracy_budget=budget), stream, solver))
        for budget in budgets]


def sweep_bandwidth(scenario, bandwidths, stream=None, solver=EXHAUSTIVE):
    """
    Runs the scenario at every constant bandwidth.

    Returns:
        One SweepRow per bandwidth, ``value`` is the bandwidth.
    """
    return [
        _sweep_row(bandwidth, run(
            scenario.replace(bandwidth_trace=((0.0, float(bandwidth)),)),
            stream, solver))
        for bandwidth in bandwidths]


def sweep_edge_power(scenario, flops, stream=None, solver=EXHAUSTIVE):
    """
    Runs the scenario for every edge throughput.

    Returns:
        One SweepRow per throughput, ``value`` is the throughput.

    Raises:
        LatencyModelError: The edge device is not in analytic mode.
    """
    if not scenario.edge.is_analytic:
        raise LatencyModelError(
            'edge device "{0}" is not in analytic mode'.format(
                scenario.edge.device_name))
    return [
        _sweep_row(value, run(
            scenario.replace(
                edge=replace(scenario.edge, flops_per_second=float(value))),
            stream, solver))
        for value in flops]
