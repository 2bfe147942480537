# -*- coding: utf-8 -*-
"""
Reads and writes model, device and scenario files.

The files are JSON documents validated by the colander schemas of
``edgesplit.data.schemas``. Paths inside a scenario file are resolved
relative to the scenario file.
"""

import io
import logging
import os

import unicodecsv

from edgesplit.business.exceptions import GeneratorError
from edgesplit.business.synthetic import GeneratorSpec
from edgesplit.data.exceptions import (
    ProfileError,
    ProfileParseError,
    ProfileValidationError,
)
from edgesplit.data.profiles import (
    DecouplingPoint,
    DeviceProfile,
    ModelProfile,
    Scenario,
)
from edgesplit.data.repository.documents import (
    dump_document,
    parse_document,
    read_document,
)
from edgesplit.data.repository.table_repository import load_tables
from edgesplit.data.schemas import (
    DeviceProfileSchema,
    GeneratorSpecSchema,
    ModelProfileSchema,
    SCHEMA_VERSION,
    ScenarioSchema,
)


LOG = logging.getLogger(__name__)

FIXTURES_PATH = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'fixtures')


def fixture_path(name):
    """
    Gets the absolute path of a shipped fixture file.
    """
    return os.path.join(FIXTURES_PATH, name)


def model_from_appstruct(appstruct):
    """
    Builds a ModelProfile from a deserialized model document.
    """
    points = tuple(
        DecouplingPoint(
            index=point['index'],
            name=point['name'],
            flops=point['flops'],
            output_elements=point['output_elements'],
            output_shape=tuple(point['output_shape']))
        for point in appstruct['points'])
    input_shape = appstruct.get('input_shape')
    return ModelProfile(
        model_name=appstruct['model_name'],
        input_bytes_raw=appstruct['input_bytes_raw'],
        input_bytes_encoded=appstruct['input_bytes_encoded'],
        points=points,
        input_shape=tuple(input_shape) if input_shape else None)


def load_model_profile(path):
    """
    Loads and validates a model profile file.

    Args:
        path: The location of the model profile.

    Returns:
        The validated ModelProfile.

    Raises:
        ProfileParseError: The file is malformed.
        ProfileValidationError: An invariant is violated. The exception
            names the offending point index.
    """
    appstruct = read_document(path, ModelProfileSchema())
    profile = model_from_appstruct(appstruct)
    LOG.debug(
        'loaded model profile %s with %d points from %s',
        profile.model_name, profile.n_points, path)
    return profile


def parse_model_profile(text):
    """
    Parses a model profile from JSON text.
    """
    return model_from_appstruct(parse_document(text, ModelProfileSchema()))


def dump_model_profile(profile):
    """
    Serializes a model profile to the JSON text of the model file format.
    """
    document = {
        'schema_version': SCHEMA_VERSION,
        'model_name': profile.model_name,
        'input_bytes_raw': profile.input_bytes_raw,
        'input_bytes_encoded': profile.input_bytes_encoded,
        'input_shape': list(profile.input_shape),
        'points': [
            {
                'index': point.index,
                'name': point.name,
                'flops': point.flops,
                'output_elements': point.output_elements,
                'output_shape': list(point.output_shape),
            }
            for point in profile.points],
    }
    return dump_document(document)


def save_model_profile(profile, path):
    with io.open(path, 'w', encoding='utf-8') as profile_file:
        profile_file.write(dump_model_profile(profile))


def read_layer_timings(path):
    """
    Reads a measured timing file.

    The file is a CSV file with the columns ``layer`` and ``seconds`` holding
    the execution time of each decoupling point on its own.

    Returns:
        The per-point seconds ordered by layer.
    """
    rows = []
    try:
        with open(path, 'rb') as timing_file:
            reader = unicodecsv.DictReader(timing_file, encoding='utf-8')
            for line_number, row in enumerate(reader, start=2):
                try:
                    rows.append((int(row['layer']), float(row['seconds'])))
                except (KeyError, TypeError, ValueError):
                    raise ProfileParseError(
                        path, 'expected columns layer and seconds',
                        line=line_number)
    except (IOError, OSError) as error:
        raise ProfileParseError(path, 'cannot read file: {0}'.format(error))
    rows.sort()
    for expected, (layer, _) in enumerate(rows, start=1):
        if layer != expected:
            raise ProfileParseError(
                path, 'non-contiguous index at {0}'.format(layer))
    return tuple(seconds for _, seconds in rows)


def write_layer_timings(path, layer_seconds):
    """
    Writes per-point seconds in the measured timing file format.
    """
    with open(path, 'wb') as timing_file:
        writer = unicodecsv.writer(timing_file, encoding='utf-8')
        writer.writerow(['layer', 'seconds'])
        for layer, seconds in enumerate(layer_seconds, start=1):
            writer.writerow([layer, repr(float(seconds))])


def _prefix_sums(layer_seconds):
    total = 0.0
    prefix = []
    for seconds in layer_seconds:
        total += seconds
        prefix.append(total)
    return tuple(prefix)


def load_device_profile(path):
    """
    Loads and validates a device profile file.

    A measured device either carries its prefix latency vector inline or
    references a timing file of per-point seconds relative to the device
    file.
    """
    appstruct = read_document(path, DeviceProfileSchema())
    prefix_latency = appstruct.get('prefix_latency')
    if appstruct.get('timings'):
        timings_path = os.path.join(
            os.path.dirname(os.path.abspath(path)), appstruct['timings'])
        prefix_latency = _prefix_sums(read_layer_timings(timings_path))
    return DeviceProfile(
        device_name=appstruct['device_name'],
        mode=appstruct['mode'],
        flops_per_second=appstruct.get('flops_per_second'),
        fit_scale=appstruct.get('fit_scale'),
        prefix_latency=(
            tuple(prefix_latency) if prefix_latency is not None else None))


def dump_device_profile(device):
    """
    Serializes a device profile to the JSON text of the device file format.
    """
    document = {
        'schema_version': SCHEMA_VERSION,
        'device_name': device.device_name,
        'mode': device.mode,
    }
    if device.is_analytic:
        document['flops_per_second'] = device.flops_per_second
        document['fit_scale'] = device.fit_scale
    else:
        document['prefix_latency'] = list(device.prefix_latency)
    return dump_document(document)


def load_scenario(path, tables_path=None):
    """
    Loads a scenario file together with the files it references.

    Args:
        path: The location of the scenario file.
        tables_path: Optional. Overrides the tables file of the scenario.

    Returns:
        The Scenario. It is not validated; see ``validate_scenario``.
    """
    appstruct = read_document(path, ScenarioSchema())
    base = os.path.dirname(os.path.abspath(path))

    def resolve(relative):
        return os.path.join(base, relative)

    try:
        model = load_model_profile(resolve(appstruct['model']))
        edge = load_device_profile(resolve(appstruct['edge']))
        cloud = load_device_profile(resolve(appstruct['cloud']))
        tables = load_tables(tables_path or resolve(appstruct['tables']))
    except ProfileError:
        LOG.error('cannot load the files referenced by scenario %s', path)
        raise
    name = appstruct.get('name') or os.path.splitext(
        os.path.basename(path))[0]
    return Scenario(
        model=model,
        edge=edge,
        cloud=cloud,
        bandwidth_trace=tuple(
            (float(time_s), float(bandwidth))
            for time_s, bandwidth in appstruct['bandwidth_trace']),
        accuracy_budget=appstruct['accuracy_budget'],
        tables=tables,
        name=name)


def load_generator_spec(path):
    """
    Loads a synthetic generator spec file.

    Raises:
        ProfileParseError: The file is malformed.
        ProfileValidationError: The parameters are inconsistent.
    """
    appstruct = read_document(path, GeneratorSpecSchema())
    appstruct.pop('schema_version', None)
    if appstruct.get('sparsity') is not None:
        appstruct['sparsity'] = tuple(appstruct['sparsity'])
    try:
        return GeneratorSpec(**appstruct)
    except GeneratorError as error:
        raise ProfileValidationError('{0}: {1}'.format(path, error))
