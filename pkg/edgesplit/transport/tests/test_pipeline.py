# -*- coding: utf-8 -*-

from unittest import TestCase

from edgesplit.business.codec import block_from_bytes
from edgesplit.business.exceptions import CodecError
from edgesplit.business.quantizer import FeatureMap, dequantize, quantize
from edgesplit.business.synthetic import GeneratorSpec, gen_feature_map
from edgesplit.data.repository.profile_repository import (
    fixture_path,
    load_model_profile,
)
from edgesplit.transport.pipeline import (
    INPUT_BIT_DEPTH,
    compress,
    digest,
    local_digest,
    reconstruct,
    split_payload,
)


class PipelineTest(TestCase):

    def setUp(self):
        self.model = load_model_profile(fixture_path('model-toy.json'))
        self.spec = GeneratorSpec(seed=7)

    def test_reconstruct(self):
        feature_map = gen_feature_map(self.spec, self.model.point(2), 0)
        block, restored = reconstruct(compress(feature_map, 4, 2))
        self.assertEqual(block.layer_index, 2)
        self.assertEqual(block.bit_depth, 4)
        self.assertEqual(restored, dequantize(quantize(feature_map, 4)))

    def test_split_payload(self):
        block = block_from_bytes(split_payload(self.spec, self.model, 3, 2, 9))
        self.assertEqual(block.layer_index, 3)
        self.assertEqual(block.bit_depth, 2)
        upload = block_from_bytes(split_payload(self.spec, self.model, 0, 0, 9))
        self.assertEqual(upload.layer_index, 0)
        self.assertEqual(upload.bit_depth, INPUT_BIT_DEPTH)
        self.assertEqual(upload.shape, (3, 32, 32))

    def test_local_digest(self):
        first = local_digest(self.spec, self.model, 5, 4, 1)
        self.assertEqual(first, local_digest(self.spec, self.model, 5, 4, 1))
        self.assertNotEqual(first, local_digest(self.spec, self.model, 5, 4, 2))
        self.assertNotEqual(first, local_digest(self.spec, self.model, 5, 1, 1))
        self.assertEqual(len(first), 64)

    def test_digest_covers_shape(self):
        values = [1.0, 2.0, 3.0, 4.0]
        self.assertNotEqual(
            digest(FeatureMap((2, 2), FeatureMap.from_array(values).values)),
            digest(FeatureMap.from_array(values)))

    def test_malformed_block(self):
        with self.assertRaises(CodecError):
            reconstruct(b'not a block')
