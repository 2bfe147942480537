# -*- coding: utf-8 -*-
"""
Produces the latency terms of every split candidate.

For a split at point i the edge runs points 1..i, the cloud runs points
i+1..N and the features of point i cross the network:

- T_E_i: edge prefix time, T_E_0 = 0
- T_C_i: cloud suffix time, T_C_N = 0
- T_trans = size / bandwidth

Profiles count fused multiply-adds. The analytic model converts them with
FLOPS_PER_FMAC before dividing by the device throughput.
"""

from dataclasses import dataclass

import numpy as np

from edgesplit.business.exceptions import (
    BandwidthError,
    LatencyModelError,
)


FLOPS_PER_FMAC = 2

ANALYTIC = 'analytic'
MEASURED = 'measured'
MIXED = 'mixed'

# Reference constants of the analytic simulation model.
EDGE_FIT_SCALE = 1.1176
CLOUD_FIT_SCALE = 2.1761
CLOUD_FLOPS = 12e12
TX2_FLOPS = 2e12
TK1_FLOPS = 300e9


def _frozen(values):
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class LatencyModel(object):
    """
    The edge prefix and cloud suffix times of all split points.

    Attributes:
        edge_prefix: Seconds, entry i holds T_E_i for i in 0..N.
        cloud_suffix: Seconds, entry i holds T_C_i for i in 0..N.
        provenance: ``analytic``, ``measured`` or ``mixed``.
    """

    edge_prefix: np.ndarray
    cloud_suffix: np.ndarray
    provenance: str

    def __post_init__(self):
        edge_prefix = _frozen(self.edge_prefix)
        cloud_suffix = _frozen(self.cloud_suffix)
        if edge_prefix.shape != cloud_suffix.shape or edge_prefix.size < 2:
            raise LatencyModelError(
                'edge and cloud vectors need N+1 entries each, got {0} and '
                '{1}'.format(edge_prefix.size, cloud_suffix.size))
        if edge_prefix[0] != 0 or cloud_suffix[-1] != 0:
            raise LatencyModelError('T_E_0 and T_C_N must be 0')
        if np.any(np.diff(edge_prefix) < 0):
            raise LatencyModelError('edge prefix times must not decrease')
        if np.any(np.diff(cloud_suffix) > 0):
            raise LatencyModelError('cloud suffix times must not increase')
        object.__setattr__(self, 'edge_prefix', edge_prefix)
        object.__setattr__(self, 'cloud_suffix', cloud_suffix)

    @property
    def n_layers(self):
        return self.edge_prefix.size - 1

    def edge(self, i):
        """
        T_E_i in seconds.
        """
        return float(self.edge_prefix[i])

    def cloud(self, i):
        """
        T_C_i in seconds.
        """
        return float(self.cloud_suffix[i])

    def compute(self, i):
        return self.edge(i) + self.cloud(i)

    @property
    def all_edge(self):
        """
        The time of running the whole model on the edge, T_E_N.
        """
        return self.edge(self.n_layers)

    @property
    def all_cloud(self):
        """
        The time of running the whole model in the cloud, T_C_0.
        """
        return self.cloud(0)


def _analytic_seconds(flops, device):
    return device.fit_scale * FLOPS_PER_FMAC * flops / device.flops_per_second


def _check_analytic(device, role):
    if device is None or not device.is_analytic:
        raise LatencyModelError(
            '{0} device "{1}" is not in analytic mode'.format(
                role, getattr(device, 'device_name', None)))


def _edge_vector(model, edge):
    if edge.is_analytic:
        return [_analytic_seconds(model.prefix_flops(i), edge)
                for i in range(model.n_points + 1)]
    prefix = _measured_prefix(model, edge, 'edge')
    return [0.0] + list(prefix)


def _cloud_vector(model, cloud):
    if cloud.is_analytic:
        return [_analytic_seconds(model.suffix_flops(i), cloud)
                for i in range(model.n_points + 1)]
    prefix = [0.0] + list(_measured_prefix(model, cloud, 'cloud'))
    total = prefix[-1]
    suffix = [total - value for value in prefix]
    suffix[-1] = 0.0
    return suffix


def _measured_prefix(model, device, role):
    prefix = device.prefix_latency
    if len(prefix) != model.n_points:
        raise LatencyModelError(
            '{0} device "{1}" has {2} timing entries, model has {3}'.format(
                role, device.device_name, len(prefix), model.n_points))
    return prefix


def analytic_model(model, edge, cloud):
    """
    Builds the latency model from device throughputs.

    T_E_i = w_e * 2 * Q(1..i) / F_E and T_C_i = w_c * 2 * Q(i+1..N) / F_C
    where Q counts fused multiply-adds.

    Args:
        model: The ModelProfile.
        edge: The analytic edge DeviceProfile.
        cloud: The analytic cloud DeviceProfile.

    Returns:
        The LatencyModel.

    Raises:
        LatencyModelError: A device is not in analytic mode.
    """
    _check_analytic(edge, 'edge')
    _check_analytic(cloud, 'cloud')
    return LatencyModel(
        edge_prefix=_edge_vector(model, edge),
        cloud_suffix=_cloud_vector(model, cloud),
        provenance=ANALYTIC)


def _check_timings(timings, n_points, role):
    timings = np.asarray(timings, dtype=np.float64)
    if timings.shape != (n_points,):
        raise LatencyModelError(
            '{0} timings have {1} entries, model has {2}'.format(
                role, timings.size, n_points))
    if np.any(timings < 0):
        raise LatencyModelError(
            'negative {0} timing at {1}'.format(
                role, int(np.argmax(timings < 0)) + 1))
    return timings


def measured_model(model, edge_timings, cloud_timings):
    """
    Builds the latency model from per-point timings.

    Args:
        model: The ModelProfile.
        edge_timings: Seconds of every point on the edge device.
        cloud_timings: Seconds of every point on the cloud server.

    Returns:
        The LatencyModel with prefix sums of the edge and suffix sums of the
        cloud timings.

    Raises:
        LatencyModelError: A vector has the wrong length or a negative entry.
    """
    edge_timings = _check_timings(edge_timings, model.n_points, 'edge')
    cloud_timings = _check_timings(cloud_timings, model.n_points, 'cloud')
    edge_prefix = np.concatenate(([0.0], np.cumsum(edge_timings)))
    cloud_suffix = np.concatenate(
        (np.cumsum(cloud_timings[::-1])[::-1], [0.0]))
    return LatencyModel(
        edge_prefix=edge_prefix,
        cloud_suffix=cloud_suffix,
        provenance=MEASURED)


def model_for_devices(model, edge, cloud):
    """
    Builds the latency model from two device profiles of any mode.

    Each side is resolved on its own: analytic devices use the throughput
    model, measured devices their prefix latency vector. A measured cloud
    vector holds the seconds of points 1..i, the suffix time is derived as
    ``total - prefix``.
    """
    if edge.is_analytic and cloud.is_analytic:
        return analytic_model(model, edge, cloud)
    if edge.is_analytic == cloud.is_analytic:
        provenance = MEASURED
    else:
        provenance = MIXED
    return LatencyModel(
        edge_prefix=_edge_vector(model, edge),
        cloud_suffix=_cloud_vector(model, cloud),
        provenance=provenance)


def transmission_time(size, bandwidth):
    """
    The seconds needed to transmit ``size`` bytes at ``bandwidth`` bytes per
    second.

    Raises:
        BandwidthError: The bandwidth is not strictly positive.
    """
    if not bandwidth > 0:
        raise BandwidthError(
            'bandwidth must be > 0, not {0}'.format(bandwidth))
    return size / bandwidth


def latency_table_rows(latency):
    """
    The rows (i, T_E_i, T_C_i, T_E_i + T_C_i) for i in 0..N.
    """
    return [
        (i, latency.edge(i), latency.cloud(i), latency.compute(i))
        for i in range(latency.n_layers + 1)]
