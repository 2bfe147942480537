# -*- coding: utf-8 -*-

from unittest import TestCase

import mock

from edgesplit.presentation.renderers import CSVRenderer


class CSVRendererTest(TestCase):

    def test_render(self):
        renderer = CSVRenderer(None)
        request = mock.Mock()
        body = renderer(
            {
                'header': ['layer', 'seconds'],
                'rows': [[1, 0.25], [2, None]],
                'filename': 'timings',
            },
            {'request': request})
        self.assertEqual(body, b'layer,seconds\r\n1,0.25\r\n2,\r\n')
        self.assertEqual(request.response.content_type, 'text/csv')
        self.assertEqual(
            request.response.content_disposition,
            'attachment;filename="timings.csv"')

    def test_default_filename(self):
        request = mock.Mock()
        CSVRenderer(None)({'header': [], 'rows': []}, {'request': request})
        self.assertEqual(
            request.response.content_disposition,
            'attachment;filename="report.csv"')
