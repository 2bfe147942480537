# -*- coding: utf-8 -*-

from edgesplit.presentation.reports import csv_bytes


class CSVRenderer(object):
    """
    Renders a report dictionary with ``header`` and ``rows`` as CSV.
    """

    def __init__(self, info):
        pass

    def __call__(self, value, system):
        resp = system['request'].response
        resp.content_type = 'text/csv'
        resp.content_disposition = 'attachment;filename="{0}.csv"'.format(
            value.get('filename', 'report'))
        return csv_bytes(value)
