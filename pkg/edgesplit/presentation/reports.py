# -*- coding: utf-8 -*-
"""
Tabular reports and plot data.

Every report is a dictionary with a ``header`` and ``rows``, the value the
CSV renderer and ``write_csv`` expect. Floats are written with ``repr`` so
identical inputs give byte-identical files.
"""

import io

import unicodecsv

from edgesplit.business.latency import latency_table_rows
from edgesplit.utils import format_bandwidth


FLOAT32_BYTES = 4


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ''
    return value


def write_csv(output, table):
    """
    Writes a report to a binary file object.
    """
    writer = unicodecsv.writer(output, encoding='utf-8')
    writer.writerow(table['header'])
    for row in table['rows']:
        writer.writerow([_cell(value) for value in row])


def csv_bytes(table):
    output = io.BytesIO()
    write_csv(output, table)
    return output.getvalue()


def save_csv(path, table):
    with io.open(path, 'wb') as output:
        write_csv(output, table)


def amplification_table(model):
    """
    The float32 size of every feature map against the input sizes. Ratios
    above 1 mark points whose features are larger than the input.
    """
    rows = []
    for point in model.points:
        feature_bytes = point.output_elements * FLOAT32_BYTES
        rows.append([
            point.index,
            point.name,
            point.output_elements,
            feature_bytes,
            float(feature_bytes) / model.input_bytes_raw,
            float(feature_bytes) / model.input_bytes_encoded,
        ])
    return {
        'header': [
            'layer', 'name', 'elements', 'float32_bytes',
            'amplification_raw', 'amplification_encoded'],
        'rows': rows,
    }


def compression_table(model, tables):
    """
    The expected compressed size of every point and bit-depth against the
    float32 size of the map.
    """
    rows = []
    for point in model.points:
        feature_bytes = point.output_elements * FLOAT32_BYTES
        for column, bits in enumerate(tables.bit_depths):
            size = float(tables.expected_size[point.index - 1, column])
            rows.append([
                point.index, point.name, bits, feature_bytes, size,
                size / feature_bytes])
    return {
        'header': [
            'layer', 'name', 'bits', 'float32_bytes', 'expected_size',
            'compression_ratio'],
        'rows': rows,
    }


def accuracy_table(tables):
    """
    The accuracy loss over all points per bit-depth.
    """
    rows = []
    for column, bits in enumerate(tables.bit_depths):
        losses = tables.accuracy_loss[:, column]
        rows.append([
            bits, float(losses.mean()), float(losses.min()),
            float(losses.max())])
    return {
        'header': [
            'bits', 'mean_accuracy_loss', 'min_accuracy_loss',
            'max_accuracy_loss'],
        'rows': rows,
    }


def layer_loss_table(model, tables, bit_depth):
    """
    The accuracy loss and expected size of every point at one bit-depth.
    """
    column = tables.column(bit_depth)
    return {
        'header': ['layer', 'name', 'bits', 'accuracy_loss', 'expected_size'],
        'rows': [
            [point.index, point.name, bit_depth,
             float(tables.accuracy_loss[point.index - 1, column]),
             float(tables.expected_size[point.index - 1, column])]
            for point in model.points],
    }


def latency_table(latency):
    return {
        'header': ['layer', 'edge_s', 'cloud_s', 'compute_s'],
        'rows': [list(row) for row in latency_table_rows(latency)],
    }


def request_table(report):
    """
    One row per simulated request.
    """
    return {
        'header': [
            'iteration', 'request', 'start_s', 'bandwidth', 'epoch',
            'split_layer', 'bit_depth', 'edge_s', 'trans_s', 'cloud_s',
            'total_s', 'predicted_bytes', 'payload_bytes', 'payload_total_s',
            'origin2cloud_s', 'encoded2cloud_s'],
        'rows': [
            [record.iteration, record.request_id, record.start_s,
             record.bandwidth, record.epoch, record.split_layer,
             record.bit_depth, record.edge_s, record.trans_s, record.cloud_s,
             record.total_s, record.predicted_bytes, record.payload_bytes,
             record.payload_total_s, record.origin2cloud_s,
             record.encoded2cloud_s]
            for record in report.records],
    }


def plan_change_table(report):
    return {
        'header': [
            'iteration', 'time_s', 'epoch', 'split_layer', 'bit_depth',
            'bandwidth'],
        'rows': [list(change) for change in report.plan_changes],
    }


def sweep_table(rows, value_name):
    """
    One row per sweep value.

    Args:
        rows: The SweepRow of the sweep.
        value_name: The column name of the swept value, e.g. ``max_loss``.
    """
    return {
        'header': [
            value_name, 'mean_total_s', 'origin2cloud_s', 'encoded2cloud_s',
            'speedup_origin2cloud', 'speedup_encoded2cloud', 'split_layer',
            'bit_depth'],
        'rows': [
            [float(row.value), row.mean_total_s, row.origin2cloud_s,
             row.encoded2cloud_s, row.speedup_origin2cloud,
             row.speedup_encoded2cloud, row.split_layer, row.bit_depth]
            for row in rows],
    }


def decision_text(decision, epoch=None):
    """
    A human readable plan decision.
    """
    if decision.is_all_cloud:
        choice = 'split 0 (upload input, run all layers in the cloud)'
    else:
        choice = 'split {0} at {1} bits'.format(
            decision.split_layer, decision.bit_depth)
    lines = [
        'decision: {0}'.format(choice),
        'edge:     {0:.3f} ms'.format(decision.edge_s * 1e3),
        'transmit: {0:.3f} ms'.format(decision.trans_s * 1e3),
        'cloud:    {0:.3f} ms'.format(decision.cloud_s * 1e3),
        'total:    {0:.3f} ms'.format(decision.total_s * 1e3),
        'predicted accuracy loss: {0:.4f}'.format(
            decision.predicted_accuracy_loss),
    ]
    if decision.bandwidth is not None:
        lines.insert(1, 'bandwidth: {0}'.format(
            format_bandwidth(decision.bandwidth)))
    if epoch is not None:
        lines.append('epoch: {0}'.format(epoch))
    return '\n'.join(lines)


def summary_text(report):
    """
    A plain text summary of a simulation run.
    """
    baselines = report.baselines
    speedups = report.speedups
    lines = [
        'scenario: {0}'.format(report.scenario_name),
        'requests: {0}'.format(len(report.records)),
        'plan epochs: {0}'.format(len(report.plan_changes)),
        'mean latency: {0:.3f} ms'.format(report.mean_total_s * 1e3),
        'p95 latency: {0:.3f} ms'.format(
            report.percentile_total_s(95) * 1e3),
    ]
    payload_mean = report.payload_mean_total_s
    if payload_mean is not None:
        lines.append(
            'mean latency (payload): {0:.3f} ms'.format(payload_mean * 1e3))
    for name in sorted(baselines):
        lines.append('{0}: {1:.3f} ms, speedup {2:.3f}x'.format(
            name, baselines[name] * 1e3, speedups[name]))
    return '\n'.join(lines)
