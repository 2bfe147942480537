# -*- coding: utf-8 -*-
"""
Colander schemas of the JSON files describing models, devices, scenarios,
lookup tables and synthetic generators.

Every file carries a mandatory ``schema_version``. The schemas check types
and value ranges; invariants spanning several fields are checked by the
profile types themselves.
"""

import colander

from edgesplit.data.profiles import DEVICE_MODES


SCHEMA_VERSION = 1


def positive(node, value):
    """
    Validates that a number is strictly positive.
    """
    if value <= 0:
        raise colander.Invalid(node, '{0} must be > 0'.format(value))


def _version_node():
    return colander.SchemaNode(
        colander.Int(),
        validator=colander.OneOf([SCHEMA_VERSION]))


class ShapeSchema(colander.SequenceSchema):
    """
    The dimensions of a feature map.
    """

    dimension = colander.SchemaNode(
        colander.Int(),
        validator=colander.Range(min=1))


class DecouplingPointSchema(colander.MappingSchema):
    """
    One decoupling point of a model profile.
    """

    index = colander.SchemaNode(colander.Int())
    name = colander.SchemaNode(colander.String())
    flops = colander.SchemaNode(colander.Float(), validator=positive)
    output_elements = colander.SchemaNode(colander.Int(), validator=positive)
    output_shape = ShapeSchema(validator=colander.Length(min=1))


class DecouplingPointsSchema(colander.SequenceSchema):
    point = DecouplingPointSchema()


class ModelProfileSchema(colander.MappingSchema):
    """
    A model profile file.
    """

    schema_version = _version_node()
    model_name = colander.SchemaNode(colander.String())
    input_bytes_raw = colander.SchemaNode(colander.Int(), validator=positive)
    input_bytes_encoded = colander.SchemaNode(
        colander.Int(), validator=positive)
    input_shape = ShapeSchema(missing=None)
    points = DecouplingPointsSchema()


class LatencyVectorSchema(colander.SequenceSchema):
    seconds = colander.SchemaNode(
        colander.Float(),
        validator=colander.Range(min=0))


class DeviceProfileSchema(colander.MappingSchema):
    """
    A device profile file. Analytic devices carry a throughput and a fitted
    scale, measured devices a prefix latency vector or a timing file.
    """

    schema_version = _version_node()
    device_name = colander.SchemaNode(colander.String())
    mode = colander.SchemaNode(
        colander.String(),
        validator=colander.OneOf(DEVICE_MODES))
    flops_per_second = colander.SchemaNode(
        colander.Float(), missing=None, validator=positive)
    fit_scale = colander.SchemaNode(
        colander.Float(), missing=None, validator=positive)
    prefix_latency = LatencyVectorSchema(missing=None)
    timings = colander.SchemaNode(colander.String(), missing=None)


class TracePointSchema(colander.TupleSchema):
    time_s = colander.SchemaNode(colander.Float())
    bytes_per_second = colander.SchemaNode(colander.Float())


class BandwidthTraceSchema(colander.SequenceSchema):
    point = TracePointSchema()


class ScenarioSchema(colander.MappingSchema):
    """
    A scenario file. Model, devices and tables are paths relative to the
    scenario file. Budget and trace values are checked by
    ``validate_scenario`` so that they are reported as diagnostics.
    """

    schema_version = _version_node()
    name = colander.SchemaNode(colander.String(), missing='')
    model = colander.SchemaNode(colander.String())
    edge = colander.SchemaNode(colander.String())
    cloud = colander.SchemaNode(colander.String())
    tables = colander.SchemaNode(colander.String())
    bandwidth_trace = BandwidthTraceSchema()
    accuracy_budget = colander.SchemaNode(colander.Float())


class FloatRowSchema(colander.SequenceSchema):
    value = colander.SchemaNode(colander.Float())


class FloatMatrixSchema(colander.SequenceSchema):
    row = FloatRowSchema()


class IntRowSchema(colander.SequenceSchema):
    value = colander.SchemaNode(colander.Int(), validator=colander.Range(min=0))


class IntMatrixSchema(colander.SequenceSchema):
    row = IntRowSchema()


class BitDepthsSchema(colander.SequenceSchema):
    bits = colander.SchemaNode(
        colander.Int(),
        validator=colander.Range(min=1, max=32))


class UploadSizesSchema(colander.MappingSchema):
    raw = colander.SchemaNode(colander.Int(), validator=positive)
    encoded = colander.SchemaNode(colander.Int(), validator=positive)


class LookupTablesSchema(colander.MappingSchema):
    """
    Persisted accuracy-loss and compressed-size tables. Row i-1 holds
    decoupling point i, column k holds ``bit_depths[k]``.
    """

    schema_version = _version_node()
    model_name = colander.SchemaNode(colander.String(), missing='')
    bit_depths = BitDepthsSchema(validator=colander.Length(min=1))
    accuracy_loss = FloatMatrixSchema(validator=colander.Length(min=1))
    expected_size = FloatMatrixSchema(validator=colander.Length(min=1))
    sample_count = IntMatrixSchema(validator=colander.Length(min=1))
    raw_upload_sizes = UploadSizesSchema()
    size_statistic = colander.SchemaNode(colander.String(), missing='mean')


class SparsitySchema(colander.SequenceSchema):
    sparsity = colander.SchemaNode(
        colander.Float(),
        validator=colander.Range(min=0, max=0.999999))


class GeneratorSpecSchema(colander.MappingSchema):
    """
    A synthetic generator spec file.
    """

    schema_version = _version_node()
    seed = colander.SchemaNode(colander.Int())
    sparsity = SparsitySchema(missing=None)
    default_sparsity = colander.SchemaNode(
        colander.Float(), missing=0.6,
        validator=colander.Range(min=0, max=0.999999))
    value_scale = colander.SchemaNode(
        colander.Float(), missing=1.0, validator=positive)
    value_sigma = colander.SchemaNode(
        colander.Float(), missing=1.0, validator=positive)
    base_accuracy = colander.SchemaNode(
        colander.Float(), missing=0.72,
        validator=colander.Range(min=0, max=1))
    loss_at_one_bit = colander.SchemaNode(
        colander.Float(), missing=0.55,
        validator=colander.Range(min=0, max=1))
    loss_decay = colander.SchemaNode(
        colander.Float(), missing=0.8, validator=colander.Range(min=0))
    last_layer_factor = colander.SchemaNode(
        colander.Float(), missing=0.02,
        validator=colander.Range(min=0, max=1))
    flag_sampling = colander.SchemaNode(
        colander.String(), missing='stratified',
        validator=colander.OneOf(['random', 'stratified']))
    max_elements = colander.SchemaNode(
        colander.Int(), missing=None, validator=positive)
