# -*- coding: utf-8 -*-
"""
Seeded generators of feature maps and calibration records.

Feature maps are non-negative and heavy-tailed like post-activation maps:
log-normal values of which a per-layer fraction is set to zero. Every map is
a pure function of (seed, layer, sample id).

The accuracy loss of a cell follows

    loss(i, c) = loss_at_one_bit * layer_factor(i) * exp(-loss_decay * (c - 1))

where the layer factor falls linearly from 1 at the first point to
``last_layer_factor`` at the last one. Correctness flags are drawn so that
the expected loss of a cell equals this curve. The ``stratified`` sampling
mode replaces the independent draws by a two-dimensional Kronecker sequence
over the sample ids, which makes tables of disjoint sample ranges agree much
more closely than independent draws.
"""

from dataclasses import dataclass, replace
import math

import numpy as np

from edgesplit.business.codec import size_breakdown
from edgesplit.business.exceptions import GeneratorError
from edgesplit.business.predictor import CalibrationRecord
from edgesplit.business.quantizer import FeatureMap, quantize
from edgesplit.utils import product


RANDOM = 'random'
STRATIFIED = 'stratified'
FLAG_SAMPLING_MODES = (RANDOM, STRATIFIED)

# Streams of the seed sequence, kept apart from layer numbers.
_INPUT_STREAM = 1 << 20
_FLAG_STREAM = (1 << 20) + 1

# Additive recurrence of the plastic number, low discrepancy in 2D.
_PLASTIC = 1.324717957244746
_ALPHA_BEFORE = 1.0 / _PLASTIC
_ALPHA_AFTER = 1.0 / (_PLASTIC * _PLASTIC)
_LAYER_SHIFT = math.sqrt(2.0) - 1.0


@dataclass(frozen=True)
class GeneratorSpec(object):
    """
    The parameters of the synthetic generators.

    Attributes:
        seed: The seed of all random streams.
        sparsity: Optional per-layer zero fractions, entry i-1 for point i.
        default_sparsity: The zero fraction of layers without an entry.
        value_scale: The scale of the log-normal values.
        value_sigma: The shape of the log-normal values.
        base_accuracy: The fraction of samples correct before compression.
        loss_at_one_bit: The accuracy loss of the first point at 1 bit.
        loss_decay: The exponential decay of the loss per additional bit.
        last_layer_factor: The loss factor of the last point.
        flag_sampling: ``stratified`` or ``random``.
        max_elements: Optional. Larger maps are generated on a reduced grid.
    """

    seed: int = 0
    sparsity: tuple = None
    default_sparsity: float = 0.6
    value_scale: float = 1.0
    value_sigma: float = 1.0
    base_accuracy: float = 0.72
    loss_at_one_bit: float = 0.55
    loss_decay: float = 0.8
    last_layer_factor: float = 0.02
    flag_sampling: str = STRATIFIED
    max_elements: int = None

    def __post_init__(self):
        if self.sparsity is not None:
            object.__setattr__(self, 'sparsity', tuple(self.sparsity))
        for value in (self.sparsity or ()) + (self.default_sparsity,):
            if not 0 <= value < 1:
                raise GeneratorError(
                    'sparsity must be in [0, 1), not {0}'.format(value))
        if self.value_scale <= 0 or self.value_sigma <= 0:
            raise GeneratorError('value parameters must be > 0')
        if not 0 <= self.base_accuracy <= 1:
            raise GeneratorError('base accuracy must be in [0, 1]')
        if self.loss_at_one_bit < 0 or self.loss_decay < 0:
            raise GeneratorError('loss curve parameters must be >= 0')
        if not 0 <= self.last_layer_factor <= 1:
            raise GeneratorError('last layer factor must be in [0, 1]')
        if self.flag_sampling not in FLAG_SAMPLING_MODES:
            raise GeneratorError(
                'flag sampling must be one of {0}, not "{1}"'.format(
                    ', '.join(FLAG_SAMPLING_MODES), self.flag_sampling))
        if self.max_elements is not None and self.max_elements < 1:
            raise GeneratorError('max_elements must be > 0')

    def layer_sparsity(self, layer):
        if self.sparsity and layer <= len(self.sparsity):
            return self.sparsity[layer - 1]
        return self.default_sparsity

    def layer_factor(self, layer, n_layers):
        if n_layers <= 1:
            return self.last_layer_factor
        position = (layer - 1) / (n_layers - 1)
        return 1.0 - (1.0 - self.last_layer_factor) * position

    def expected_loss(self, layer, bit_depth, n_layers):
        """
        The accuracy loss the generated flags of a cell converge to. It is
        capped at the base accuracy, no more samples can be lost.
        """
        loss = (self.loss_at_one_bit * self.layer_factor(layer, n_layers)
                * math.exp(-self.loss_decay * (bit_depth - 1)))
        return min(loss, self.base_accuracy)

    def replace(self, **changes):
        return replace(self, **changes)


def capped_shape(shape, max_elements):
    """
    Shrinks a shape to at most ``max_elements`` elements.

    The last two dimensions are scaled down by the same factor. A shape
    whose leading dimensions alone exceed the cap is flattened.
    """
    shape = tuple(shape)
    total = product(shape)
    if not max_elements or total <= max_elements:
        return shape
    if len(shape) == 1:
        return (max_elements,)
    factor = math.sqrt(max_elements / total)
    reduced = shape[:-2] + tuple(
        max(1, int(dim * factor)) for dim in shape[-2:])
    if product(reduced) > max_elements:
        return (max_elements,)
    return reduced


def _sparse_lognormal(spec, rng, shape, sparsity):
    size = product(shape)
    values = rng.lognormal(mean=0.0, sigma=spec.value_sigma, size=size)
    values *= spec.value_scale
    values[rng.random(size) < sparsity] = 0.0
    return FeatureMap(tuple(shape), values)


def gen_feature_map(spec, point, sample_id):
    """
    Generates the output feature map of a decoupling point.

    Args:
        spec: The GeneratorSpec.
        point: The DecouplingPoint, its shape is capped by
            ``spec.max_elements``.
        sample_id: The sample the map belongs to.

    Returns:
        The FeatureMap, identical for identical (seed, point, sample id).
    """
    rng = np.random.default_rng([spec.seed, point.index, sample_id])
    shape = capped_shape(point.output_shape, spec.max_elements)
    return _sparse_lognormal(
        spec, rng, shape, spec.layer_sparsity(point.index))


def gen_input_map(spec, model, sample_id):
    """
    Generates the raw input of a sample, 8-bit pixel values of the model's
    input shape.
    """
    rng = np.random.default_rng([spec.seed, _INPUT_STREAM, sample_id])
    shape = capped_shape(model.input_shape, spec.max_elements)
    values = rng.integers(0, 256, size=product(shape)).astype(np.float64)
    return FeatureMap(tuple(shape), values)


def _fraction(value):
    return value - math.floor(value)


class _FlagSampler(object):
    """
    Draws the correctness flags of the samples.

    A sample is correct before compression if ``u < base_accuracy``. It stays
    correct at layer i and bit-depth c unless ``v < loss(i, c) /
    base_accuracy``. v depends on the sample and the layer only, so a sample
    that survives at c bits also survives at more bits.
    """

    def __init__(self, spec):
        self.spec = spec
        offsets = np.random.default_rng([spec.seed, _FLAG_STREAM]).random(2)
        self._offset_before = float(offsets[0])
        self._offset_after = float(offsets[1])

    def before(self, sample_id):
        if self.spec.flag_sampling == STRATIFIED:
            u = _fraction(self._offset_before + sample_id * _ALPHA_BEFORE)
        else:
            u = np.random.default_rng(
                [self.spec.seed, _FLAG_STREAM, sample_id]).random()
        return u < self.spec.base_accuracy

    def after_draw(self, sample_id, layer):
        if self.spec.flag_sampling == STRATIFIED:
            return _fraction(
                self._offset_after + layer * _LAYER_SHIFT
                + sample_id * _ALPHA_AFTER)
        return np.random.default_rng(
            [self.spec.seed, _FLAG_STREAM, sample_id, layer]).random()

    def survival_threshold(self, layer, bit_depth, n_layers):
        if self.spec.base_accuracy == 0:
            return 0.0
        return (self.spec.expected_loss(layer, bit_depth, n_layers)
                / self.spec.base_accuracy)


def extrapolated_size(header, payload, full_shape, reduced_shape):
    """
    Scales the payload of a reduced map to the full map. The header is
    adjusted for a different number of dimensions.
    """
    full = product(full_shape)
    reduced = product(reduced_shape)
    if full == reduced:
        return header + payload
    header += 4 * (len(full_shape) - len(reduced_shape))
    return header + int(math.ceil(payload * full / reduced))


def gen_calibration_corpus(spec, model, bit_depths, n_samples,
                           first_sample=0):
    """
    Generates calibration records for every sample, point and bit-depth.

    Sizes come from the Huffman coded size of the generated maps. Maps
    generated on a reduced grid have their payload extrapolated to the full
    map.

    Args:
        spec: The GeneratorSpec.
        model: The ModelProfile.
        bit_depths: The bit-depths to calibrate, at most 16.
        n_samples: The number of samples, > 0.
        first_sample: Optional. The id of the first sample.

    Yields:
        CalibrationRecord ordered by sample, point and bit-depth.
    """
    if n_samples <= 0:
        raise GeneratorError('n_samples must be > 0')
    bit_depths = sorted(set(bit_depths))
    sampler = _FlagSampler(spec)
    n_layers = model.n_points
    for sample_id in range(first_sample, first_sample + n_samples):
        correct_before = sampler.before(sample_id)
        for point in model.points:
            feature_map = gen_feature_map(spec, point, sample_id)
            draw = sampler.after_draw(sample_id, point.index)
            for bit_depth in bit_depths:
                header, payload = size_breakdown(
                    quantize(feature_map, bit_depth))
                threshold = sampler.survival_threshold(
                    point.index, bit_depth, n_layers)
                yield CalibrationRecord(
                    sample_id=sample_id,
                    layer_index=point.index,
                    bit_depth=bit_depth,
                    compressed_bytes=extrapolated_size(
                        header, payload, point.output_shape,
                        feature_map.shape),
                    correct_before=correct_before,
                    correct_after=correct_before and draw >= threshold)
