# -*- coding: utf-8 -*-
"""
Utilities for parsing quantities given on the command line and in ini files.

Units are decimal: 1 KBps is 1000 bytes per second, 1 MBps is 1000000 bytes
per second. Binary units are accepted with the explicit ``i`` infix, e.g.
``KiBps``.
"""

import re


_BANDWIDTH_UNITS = {
    '': 1,
    'b': 1,
    'kb': 1000,
    'mb': 1000 ** 2,
    'gb': 1000 ** 3,
    'kib': 1024,
    'mib': 1024 ** 2,
    'gib': 1024 ** 3,
}

_FLOPS_UNITS = {
    '': 1,
    'flops': 1,
    'kflops': 1e3,
    'mflops': 1e6,
    'gflops': 1e9,
    'tflops': 1e12,
}

_QUANTITY = re.compile(r'^\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([A-Za-z/]*)\s*$')


def _parse_quantity(value, units, kind):
    if isinstance(value, (int, float)):
        return float(value)
    match = _QUANTITY.match(value or '')
    if match is None:
        raise ValueError('Invalid {0}: "{1}"'.format(kind, value))
    number, unit = match.groups()
    unit = unit.lower()
    for suffix in ('/s', 'ps'):
        if unit.endswith(suffix) and not unit.endswith('flops'):
            unit = unit[:-len(suffix)]
    if unit not in units:
        raise ValueError(
            'Unknown {0} unit "{1}" in "{2}"'.format(kind, match.group(2), value))
    return float(number) * units[unit]


def parse_bandwidth(value):
    """
    Parses a bandwidth into bytes per second.

    Args:
        value: A number of bytes per second or a string with a unit suffix
            like ``300KBps``, ``1.5MBps`` or ``100000``.

    Returns:
        The bandwidth in bytes per second as float.

    Raises:
        ValueError: The value cannot be parsed.
    """
    return _parse_quantity(value, _BANDWIDTH_UNITS, 'bandwidth')


def parse_flops(value):
    """
    Parses a device throughput like ``300GFLOPS`` or ``2e12`` into floating
    point operations per second.
    """
    return _parse_quantity(value, _FLOPS_UNITS, 'throughput')


def parse_bandwidth_list(value):
    """
    Parses a comma separated list of bandwidths.
    """
    return [parse_bandwidth(item) for item in value.split(',') if item.strip()]


def format_bandwidth(bytes_per_second):
    """
    Formats bytes per second with the largest decimal unit not exceeding it.
    """
    for unit, factor in (('GBps', 1e9), ('MBps', 1e6), ('KBps', 1e3)):
        if bytes_per_second >= factor:
            return '{0:g}{1}'.format(bytes_per_second / factor, unit)
    return '{0:g}Bps'.format(bytes_per_second)


def product(values):
    """
    Returns the integer product of a sequence, 1 for an empty one.
    """
    result = 1
    for value in values:
        result *= int(value)
    return result
