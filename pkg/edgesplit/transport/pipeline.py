# -*- coding: utf-8 -*-
"""
The compression pipeline shared by edge agent, cloud service and the local
reference run: quantize, encode, decode, dequantize.
"""

import hashlib
import struct

import numpy as np

from edgesplit.business.codec import (
    block_from_bytes,
    block_to_bytes,
    decode,
    encode,
)
from edgesplit.business.quantizer import (
    dequantize,
    quantize,
)
from edgesplit.business.synthetic import (
    gen_feature_map,
    gen_input_map,
)


# The all-cloud split uploads the 8-bit input unchanged.
INPUT_BIT_DEPTH = 8


def digest(feature_map):
    """
    The SHA-256 hex digest of a feature map's shape and float64 values.
    """
    sha = hashlib.sha256()
    sha.update(struct.pack('<I', len(feature_map.shape)))
    sha.update(struct.pack(
        '<{0}I'.format(len(feature_map.shape)), *feature_map.shape))
    sha.update(np.asarray(feature_map.values, dtype='<f8').tobytes())
    return sha.hexdigest()


def compress(feature_map, bit_depth, layer_index):
    """
    Quantizes and encodes a feature map into block bytes.
    """
    return block_to_bytes(encode(quantize(feature_map, bit_depth), layer_index))


def reconstruct(data):
    """
    Decodes block bytes and dequantizes the map.

    Returns:
        The tuple (EncodedBlock, reconstructed FeatureMap).

    Raises:
        CodecError: The block is malformed.
    """
    block = block_from_bytes(data)
    return block, dequantize(decode(block))


def split_payload(spec, model, split_layer, bit_depth, sample_id):
    """
    Builds the block bytes the edge transmits for a sample under a plan.

    The all-cloud split transmits the generated input at INPUT_BIT_DEPTH,
    other splits the generated feature map of the split point.
    """
    if split_layer == 0:
        return compress(
            gen_input_map(spec, model, sample_id), INPUT_BIT_DEPTH, 0)
    point = model.point(split_layer)
    return compress(
        gen_feature_map(spec, point, sample_id), bit_depth, split_layer)


def local_digest(spec, model, split_layer, bit_depth, sample_id):
    """
    The digest of the reconstructed map of a purely local pipeline run.
    """
    return digest(reconstruct(
        split_payload(spec, model, split_layer, bit_depth, sample_id))[1])
