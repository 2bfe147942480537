# -*- coding: utf-8 -*-

from unittest import TestCase

from edgesplit.utils import (
    format_bandwidth,
    parse_bandwidth,
    parse_bandwidth_list,
    parse_flops,
    product,
)


class ParseBandwidthTest(TestCase):

    def test_decimal_units(self):
        self.assertEqual(parse_bandwidth('300KBps'), 300000.0)
        self.assertEqual(parse_bandwidth('1.5MBps'), 1500000.0)
        self.assertEqual(parse_bandwidth('10 MB/s'), 10000000.0)
        self.assertEqual(parse_bandwidth('1GBps'), 1e9)

    def test_binary_units(self):
        self.assertEqual(parse_bandwidth('1KiBps'), 1024.0)
        self.assertEqual(parse_bandwidth('2MiBps'), 2 * 1024.0 ** 2)

    def test_plain_numbers(self):
        self.assertEqual(parse_bandwidth('100000'), 100000.0)
        self.assertEqual(parse_bandwidth(250), 250.0)
        self.assertEqual(parse_bandwidth('1e6'), 1e6)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            parse_bandwidth('fast')
        with self.assertRaises(ValueError):
            parse_bandwidth('300XBps')
        with self.assertRaises(ValueError):
            parse_bandwidth('')

    def test_list(self):
        self.assertEqual(
            parse_bandwidth_list('100KBps, 1MBps,'), [100000.0, 1000000.0])


class ParseFlopsTest(TestCase):

    def test_units(self):
        self.assertEqual(parse_flops('300GFLOPS'), 3e11)
        self.assertEqual(parse_flops('2TFLOPS'), 2e12)
        self.assertEqual(parse_flops('12e12'), 12e12)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            parse_flops('2TB')


class FormatBandwidthTest(TestCase):

    def test_format(self):
        self.assertEqual(format_bandwidth(300000), '300KBps')
        self.assertEqual(format_bandwidth(1500000), '1.5MBps')
        self.assertEqual(format_bandwidth(999), '999Bps')

    def test_product(self):
        self.assertEqual(product([]), 1)
        self.assertEqual(product((64, 224, 224)), 3211264)
