# -*- coding: utf-8 -*-
"""
Converts float feature maps into small integers at bit-depth c and back.

A map whose maximum is at least 2^c is mapped affinely onto [0, 2^c - 1]
using the minimum and maximum of the map at hand. A map whose values already
fit is passed through, rounded and clamped to [0, 2^c - 1]. A constant map
always yields zero symbols.

Scaled values are rounded half away from zero. All scaled values are
non-negative, so this is ``floor(x + 0.5)``.
"""

from dataclasses import dataclass

import numpy as np

from edgesplit.business.exceptions import QuantizationError
from edgesplit.utils import product


MIN_BIT_DEPTH = 1
MAX_BIT_DEPTH = 32


@dataclass(frozen=True, eq=False)
class FeatureMap(object):
    """
    A float feature map.

    Attributes:
        shape: The dimensions of the map.
        values: The flat values in row-major order as float64 array.
    """

    shape: tuple
    values: np.ndarray

    @classmethod
    def from_array(cls, array):
        """
        Creates a FeatureMap from an array of any shape.
        """
        array = np.asarray(array, dtype=np.float64)
        return cls(tuple(int(dim) for dim in array.shape), array.ravel())

    def __eq__(self, other):
        return (isinstance(other, FeatureMap)
                and self.shape == other.shape
                and np.array_equal(self.values, other.values))

    def __len__(self):
        return int(self.values.size)


@dataclass(frozen=True, eq=False)
class QuantizedMap(object):
    """
    A feature map quantized to integer symbols.

    Attributes:
        shape: The dimensions of the map.
        bit_depth: The number of bits c, symbols lie in [0, 2^c).
        v_min: The minimum of the original values.
        v_max: The maximum of the original values.
        passthrough: True if the values were kept instead of rescaled.
        symbols: The flat symbols as uint64 array.
    """

    shape: tuple
    bit_depth: int
    v_min: float
    v_max: float
    passthrough: bool
    symbols: np.ndarray

    def __eq__(self, other):
        return (isinstance(other, QuantizedMap)
                and self.shape == other.shape
                and self.bit_depth == other.bit_depth
                and self.v_min == other.v_min
                and self.v_max == other.v_max
                and self.passthrough == other.passthrough
                and np.array_equal(self.symbols, other.symbols))

    @property
    def levels(self):
        """
        The largest symbol value, 2^c - 1.
        """
        return (1 << self.bit_depth) - 1

    def validate(self):
        """
        Checks the structural invariants of the map.

        Raises:
            QuantizationError: An invariant is violated.
        """
        _check_bit_depth(self.bit_depth)
        if self.symbols.size != product(self.shape):
            raise QuantizationError(
                'map has {0} symbols but shape {1}'.format(
                    self.symbols.size, list(self.shape)))
        if self.symbols.size and int(self.symbols.max()) > self.levels:
            raise QuantizationError(
                'symbol {0} exceeds {1} bits'.format(
                    int(self.symbols.max()), self.bit_depth))
        if self.v_min > self.v_max:
            raise QuantizationError('v_min exceeds v_max')


def _check_bit_depth(bit_depth):
    if (not isinstance(bit_depth, (int, np.integer))
            or bit_depth < MIN_BIT_DEPTH or bit_depth > MAX_BIT_DEPTH):
        raise QuantizationError(
            'bit-depth must be an integer in [{0}, {1}], not {2}'.format(
                MIN_BIT_DEPTH, MAX_BIT_DEPTH, bit_depth))


def _round_half_up(values):
    return np.floor(values + 0.5)


def quantize(feature_map, bit_depth):
    """
    Quantizes a feature map to integer symbols.

    Args:
        feature_map: The FeatureMap to quantize.
        bit_depth: The number of bits c in [1, 32].

    Returns:
        The QuantizedMap.

    Raises:
        QuantizationError: The bit-depth is invalid, the map is empty or it
            contains a non-finite value.
    """
    _check_bit_depth(bit_depth)
    values = np.asarray(feature_map.values, dtype=np.float64)
    if values.size == 0:
        raise QuantizationError('feature map is empty')
    if not np.all(np.isfinite(values)):
        raise QuantizationError('feature map contains a non-finite value')
    levels = (1 << bit_depth) - 1
    v_min = float(values.min())
    v_max = float(values.max())
    if v_max == v_min:
        symbols = np.zeros(values.size, dtype=np.uint64)
        passthrough = False
    elif v_max >= float(1 << bit_depth):
        scaled = (values - v_min) * levels / (v_max - v_min)
        symbols = np.clip(_round_half_up(scaled), 0, levels).astype(np.uint64)
        passthrough = False
    else:
        clamped = np.clip(values, 0.0, float(levels))
        symbols = np.clip(
            _round_half_up(clamped), 0, levels).astype(np.uint64)
        passthrough = True
    return QuantizedMap(
        shape=tuple(feature_map.shape),
        bit_depth=int(bit_depth),
        v_min=v_min,
        v_max=v_max,
        passthrough=passthrough,
        symbols=symbols)


def dequantize(quantized_map):
    """
    Reconstructs float values from a quantized map.

    Rescaled maps are mapped back with the affine inverse
    ``v_min + s * (v_max - v_min) / (2^c - 1)``, passed through maps return
    their symbols as floats.
    """
    quantized_map.validate()
    symbols = quantized_map.symbols.astype(np.float64)
    if quantized_map.passthrough:
        values = symbols
    elif quantized_map.v_max == quantized_map.v_min:
        values = np.full(symbols.size, quantized_map.v_min, dtype=np.float64)
    else:
        step = (quantized_map.v_max - quantized_map.v_min) / quantized_map.levels
        values = quantized_map.v_min + symbols * step
    return FeatureMap(tuple(quantized_map.shape), values)


def reconstruction_error_bound(quantized_map):
    """
    The largest reconstruction error of a rescaled map, half a step.
    Passthrough and constant maps have no bound beyond rounding; 0.5 and 0 are
    returned respectively.
    """
    if quantized_map.passthrough:
        return 0.5
    if quantized_map.v_max == quantized_map.v_min:
        return 0.0
    return (quantized_map.v_max - quantized_map.v_min) / (
        2.0 * quantized_map.levels)
