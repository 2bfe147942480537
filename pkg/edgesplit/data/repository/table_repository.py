# -*- coding: utf-8 -*-
"""
Persists lookup tables and calibration records.

Tables are JSON documents following ``LookupTablesSchema``. Calibration
records are CSV files with the columns ``sample_id``, ``layer``, ``bits``,
``compressed_bytes``, ``correct_before`` and ``correct_after``; booleans are
written as 0 and 1.
"""

import io
import logging

import unicodecsv

from edgesplit.business.exceptions import TableError
from edgesplit.business.predictor import (
    CalibrationRecord,
    LookupTables,
)
from edgesplit.data.exceptions import (
    ProfileParseError,
    ProfileValidationError,
)
from edgesplit.data.repository.documents import (
    read_document,
    write_document,
)
from edgesplit.data.schemas import (
    LookupTablesSchema,
    SCHEMA_VERSION,
)


LOG = logging.getLogger(__name__)

CALIBRATION_COLUMNS = [
    'sample_id',
    'layer',
    'bits',
    'compressed_bytes',
    'correct_before',
    'correct_after',
]

_TRUE = ('1', 'true', 'yes')
_FALSE = ('0', 'false', 'no')


def _parse_flag(value):
    value = (value or '').strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise ValueError('not a boolean: "{0}"'.format(value))


def tables_to_document(tables):
    """
    Converts lookup tables into the JSON document of the tables format.
    """
    return {
        'schema_version': SCHEMA_VERSION,
        'model_name': tables.model_name,
        'bit_depths': list(tables.bit_depths),
        'accuracy_loss': tables.accuracy_loss.tolist(),
        'expected_size': tables.expected_size.tolist(),
        'sample_count': tables.sample_count.astype(int).tolist(),
        'raw_upload_sizes': {
            'raw': int(tables.raw_upload_sizes['raw']),
            'encoded': int(tables.raw_upload_sizes['encoded']),
        },
        'size_statistic': tables.size_statistic,
    }


def tables_from_appstruct(appstruct, path='<string>'):
    """
    Builds LookupTables from a deserialized tables document.

    Raises:
        ProfileValidationError: The matrices do not have N x C entries.
    """
    try:
        return LookupTables(
            n_layers=len(appstruct['accuracy_loss']),
            bit_depths=tuple(appstruct['bit_depths']),
            accuracy_loss=appstruct['accuracy_loss'],
            expected_size=appstruct['expected_size'],
            sample_count=appstruct['sample_count'],
            raw_upload_sizes=dict(appstruct['raw_upload_sizes']),
            size_statistic=appstruct['size_statistic'],
            model_name=appstruct['model_name'])
    except (TableError, ValueError) as error:
        raise ProfileValidationError('{0}: {1}'.format(path, error))


def load_tables(path):
    """
    Loads lookup tables from a tables file.

    Args:
        path: The location of the tables file.

    Returns:
        The LookupTables.

    Raises:
        ProfileParseError: The file is malformed.
        ProfileValidationError: The matrices are inconsistent.
    """
    tables = tables_from_appstruct(
        read_document(path, LookupTablesSchema()), path)
    LOG.debug(
        'loaded %dx%d lookup tables from %s',
        tables.n_layers, len(tables.bit_depths), path)
    return tables


def save_tables(tables, path):
    write_document(path, tables_to_document(tables))


def write_tables_csv(tables, output):
    """
    Exports the accuracy-loss and size grids as CSV for plotting.

    Args:
        tables: The LookupTables.
        output: A binary file object.
    """
    writer = unicodecsv.writer(output, encoding='utf-8')
    writer.writerow(
        ['layer', 'bits', 'accuracy_loss', 'expected_size', 'sample_count'])
    for row in range(tables.n_layers):
        for column, bits in enumerate(tables.bit_depths):
            writer.writerow([
                row + 1,
                bits,
                repr(float(tables.accuracy_loss[row, column])),
                repr(float(tables.expected_size[row, column])),
                int(tables.sample_count[row, column]),
            ])


def write_calibration_records(output, records):
    """
    Writes calibration records as CSV.

    Args:
        output: A binary file object.
        records: An iterable of CalibrationRecord.

    Returns:
        The number of records written.
    """
    writer = unicodecsv.writer(output, encoding='utf-8')
    writer.writerow(CALIBRATION_COLUMNS)
    count = 0
    for record in records:
        writer.writerow([
            record.sample_id,
            record.layer_index,
            record.bit_depth,
            record.compressed_bytes,
            int(bool(record.correct_before)),
            int(bool(record.correct_after)),
        ])
        count += 1
    return count


def save_calibration_records(path, records):
    with io.open(path, 'wb') as output:
        count = write_calibration_records(output, records)
    LOG.info('wrote %d calibration records to %s', count, path)
    return count


def iter_calibration_records(path):
    """
    Reads calibration records from a CSV file lazily.

    Raises:
        ProfileParseError: A row is malformed. The error names the line.
    """
    try:
        calibration_file = io.open(path, 'rb')
    except (IOError, OSError) as error:
        raise ProfileParseError(path, 'cannot read file: {0}'.format(error))
    with calibration_file:
        reader = unicodecsv.DictReader(calibration_file, encoding='utf-8')
        missing = [
            column for column in CALIBRATION_COLUMNS
            if column not in (reader.fieldnames or [])]
        if missing:
            raise ProfileParseError(
                path, 'missing columns {0}'.format(', '.join(missing)),
                line=1)
        for line_number, row in enumerate(reader, start=2):
            try:
                record = CalibrationRecord(
                    sample_id=int(row['sample_id']),
                    layer_index=int(row['layer']),
                    bit_depth=int(row['bits']),
                    compressed_bytes=int(row['compressed_bytes']),
                    correct_before=_parse_flag(row['correct_before']),
                    correct_after=_parse_flag(row['correct_after']))
            except (TypeError, ValueError) as error:
                raise ProfileParseError(path, str(error), line=line_number)
            if record.compressed_bytes <= 0:
                raise ProfileParseError(
                    path, 'compressed_bytes must be > 0', line=line_number,
                    field='compressed_bytes')
            yield record


def load_calibration_records(path):
    return list(iter_calibration_records(path))
