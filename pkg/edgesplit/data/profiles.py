# -*- coding: utf-8 -*-
"""
Static descriptions of models, devices and scenarios.

A model is a chain of decoupling points. Branchy networks are flattened into
unit granularity by the profile author, e.g. one residual unit is one point.
The all-cloud option, split index 0, is not stored in the profile. Its upload
size is the raw or encoded input size of the model.

All profile types are immutable after construction.
"""

from dataclasses import dataclass
from functools import cached_property
from itertools import accumulate

from edgesplit.data.exceptions import ProfileValidationError
from edgesplit.utils import product


MEASURED = 'measured'
ANALYTIC = 'analytic'
DEVICE_MODES = (MEASURED, ANALYTIC)


@dataclass(frozen=True)
class DecouplingPoint(object):
    """
    A position in the layered network at which execution may be split.

    Attributes:
        index: The 1-based ordinal of the point.
        name: A free text name like ``conv3_2`` or ``res4b``.
        flops: The fused multiply-adds needed to execute this unit.
        output_elements: The number of scalars of the output feature map.
        output_shape: The dimensions of the output feature map.
    """

    index: int
    name: str
    flops: float
    output_elements: int
    output_shape: tuple

    def __post_init__(self):
        if self.flops <= 0:
            raise ProfileValidationError(
                'flops of point {0} must be > 0'.format(self.index),
                self.index)
        if self.output_elements <= 0:
            raise ProfileValidationError(
                'output_elements of point {0} must be > 0'.format(self.index),
                self.index)
        if any(dim <= 0 for dim in self.output_shape):
            raise ProfileValidationError(
                'output_shape of point {0} must be positive'.format(
                    self.index),
                self.index)
        if product(self.output_shape) != self.output_elements:
            raise ProfileValidationError(
                'output_elements of point {0} is {1} but its shape {2} has '
                '{3} elements'.format(
                    self.index, self.output_elements,
                    list(self.output_shape), product(self.output_shape)),
                self.index)


@dataclass(frozen=True)
class ModelProfile(object):
    """
    The ordered decoupling points of a model and the sizes of its input.

    Attributes:
        model_name: Free text.
        input_bytes_raw: The size of the uncompressed input.
        input_bytes_encoded: The size of the pre-encoded (e.g. PNG) input.
        points: The decoupling points ordered by index.
        input_shape: The shape of the raw input, defaults to a flat shape of
            ``input_bytes_raw`` elements.
    """

    model_name: str
    input_bytes_raw: int
    input_bytes_encoded: int
    points: tuple
    input_shape: tuple = None

    def __post_init__(self):
        if not self.points:
            raise ProfileValidationError('model has no decoupling points')
        for expected, point in enumerate(self.points, start=1):
            if point.index != expected:
                raise ProfileValidationError(
                    'non-contiguous index at {0}'.format(point.index),
                    point.index)
        if self.input_bytes_raw <= 0 or self.input_bytes_encoded <= 0:
            raise ProfileValidationError('input sizes must be > 0')
        if self.input_bytes_encoded > self.input_bytes_raw:
            raise ProfileValidationError(
                'input_bytes_encoded ({0}) exceeds input_bytes_raw '
                '({1})'.format(self.input_bytes_encoded, self.input_bytes_raw))
        if self.input_shape is None:
            object.__setattr__(self, 'input_shape', (self.input_bytes_raw,))

    @property
    def n_points(self):
        """
        The number of decoupling points N.
        """
        return len(self.points)

    def point(self, index):
        """
        Gets the decoupling point of the 1-based index.
        """
        if index < 1 or index > self.n_points:
            raise IndexError(
                'point {0} outside 1..{1}'.format(index, self.n_points))
        return self.points[index - 1]

    @cached_property
    def _prefix_flops(self):
        return (0,) + tuple(accumulate(point.flops for point in self.points))

    @cached_property
    def _suffix_flops(self):
        reversed_sums = tuple(
            accumulate(point.flops for point in reversed(self.points)))
        return tuple(reversed(reversed_sums)) + (0,)

    def prefix_flops(self, i):
        """
        Q(1..i), the fused multiply-adds of points 1 to i. Q(1..0) is 0.
        """
        return self._prefix_flops[i]

    def suffix_flops(self, i):
        """
        Q(i+1..N), the fused multiply-adds of the points after i. The suffix
        of N is 0.
        """
        return self._suffix_flops[i]

    @property
    def total_flops(self):
        """
        Q(1..N).
        """
        return self._suffix_flops[0]


@dataclass(frozen=True)
class DeviceProfile(object):
    """
    The throughput description of an edge device or a cloud server.

    Attributes:
        device_name: Free text.
        mode: ``analytic`` or ``measured``.
        flops_per_second: The device throughput F, analytic mode.
        fit_scale: The fitted factor w_e or w_c, analytic mode.
        prefix_latency: Measured mode. Entry i-1 holds the seconds needed to
            run points 1..i on this device.
    """

    device_name: str
    mode: str
    flops_per_second: float = None
    fit_scale: float = None
    prefix_latency: tuple = None

    def __post_init__(self):
        if self.mode not in DEVICE_MODES:
            raise ProfileValidationError(
                'device mode must be one of {0}, not "{1}"'.format(
                    ', '.join(DEVICE_MODES), self.mode))
        if self.mode == ANALYTIC:
            if not self.flops_per_second or self.flops_per_second <= 0:
                raise ProfileValidationError(
                    'analytic device "{0}" needs flops_per_second > 0'.format(
                        self.device_name))
            if not self.fit_scale or self.fit_scale <= 0:
                raise ProfileValidationError(
                    'analytic device "{0}" needs fit_scale > 0'.format(
                        self.device_name))
        else:
            if self.prefix_latency is None:
                raise ProfileValidationError(
                    'measured device "{0}" has no latency vector'.format(
                        self.device_name))
            previous = 0.0
            for index, value in enumerate(self.prefix_latency, start=1):
                if value < 0:
                    raise ProfileValidationError(
                        'negative latency at {0}'.format(index), index)
                if value < previous:
                    raise ProfileValidationError(
                        'prefix latency decreases at {0}'.format(index), index)
                previous = value

    @property
    def is_analytic(self):
        return self.mode == ANALYTIC

    def layer_latency(self):
        """
        The per-point seconds of a measured device, i.e. the differences of
        the prefix vector.
        """
        if self.prefix_latency is None:
            return None
        previous = 0.0
        result = []
        for value in self.prefix_latency:
            result.append(value - previous)
            previous = value
        return tuple(result)


@dataclass(frozen=True)
class Scenario(object):
    """
    Everything needed to plan and simulate one deployment.

    The invariants of a scenario are reported by ``validate_scenario``
    instead of being enforced on construction.
    """

    model: ModelProfile
    edge: DeviceProfile
    cloud: DeviceProfile
    bandwidth_trace: tuple
    accuracy_budget: float
    tables: object = None
    name: str = ''

    def bandwidth_at(self, time_s):
        """
        The bandwidth of the piecewise constant trace at the given time.
        """
        current = self.bandwidth_trace[0][1]
        for start, bandwidth in self.bandwidth_trace:
            if start > time_s:
                break
            current = bandwidth
        return current

    @property
    def mean_bandwidth(self):
        """
        The mean of the trace values, V.
        """
        values = [bandwidth for _, bandwidth in self.bandwidth_trace]
        return sum(values) / len(values)

    def replace(self, **changes):
        """
        Returns a copy with the given fields replaced.
        """
        fields = dict(
            model=self.model, edge=self.edge, cloud=self.cloud,
            bandwidth_trace=self.bandwidth_trace,
            accuracy_budget=self.accuracy_budget, tables=self.tables,
            name=self.name)
        fields.update(changes)
        return Scenario(**fields)


def _device_diagnostics(role, device, n_points):
    if device is None:
        return ['scenario has no {0} device'.format(role)]
    if device.mode == MEASURED and len(device.prefix_latency) != n_points:
        return [
            '{0} device "{1}" has {2} timing entries, model has {3}'.format(
                role, device.device_name, len(device.prefix_latency),
                n_points)]
    return []


def validate_scenario(scenario):
    """
    Checks the cross references of a scenario.

    Args:
        scenario: The scenario to check.

    Returns:
        A list of diagnostic messages which is empty if the scenario is
        consistent.
    """
    diagnostics = []
    n_points = scenario.model.n_points
    if scenario.accuracy_budget < 0:
        diagnostics.append('accuracy budget must be ≥ 0')
    trace = scenario.bandwidth_trace
    if not trace:
        diagnostics.append('bandwidth trace is empty')
    else:
        if trace[0][0] != 0:
            diagnostics.append('bandwidth trace must start at time 0')
        for position, (time_s, bandwidth) in enumerate(trace):
            if bandwidth <= 0:
                diagnostics.append(
                    'bandwidth must be > 0 (trace entry {0})'.format(position))
            if position and time_s <= trace[position - 1][0]:
                diagnostics.append(
                    'bandwidth trace times must be strictly increasing '
                    '(trace entry {0})'.format(position))
    diagnostics.extend(_device_diagnostics('edge', scenario.edge, n_points))
    diagnostics.extend(_device_diagnostics('cloud', scenario.cloud, n_points))
    tables = scenario.tables
    if tables is None:
        diagnostics.append('scenario has no lookup tables')
    else:
        if tables.n_layers != n_points:
            diagnostics.append(
                'lookup tables built for N={0} do not match model "{1}" with '
                'N={2}'.format(
                    tables.n_layers, scenario.model.model_name, n_points))
        else:
            missing = tables.empty_cells()
            if missing:
                diagnostics.append(
                    'lookup tables have no samples for cells {0}'.format(
                        ', '.join('({0},{1})'.format(i, c)
                                  for i, c in missing)))
        if not tables.bit_depths:
            diagnostics.append('lookup tables have no bit-depths')
    return diagnostics
