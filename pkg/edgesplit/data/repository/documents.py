# -*- coding: utf-8 -*-
"""
Reads and writes the JSON documents of the file formats.
"""

import io
import json

import colander

from edgesplit.data.exceptions import ProfileParseError


def read_document(path, schema):
    """
    Reads a JSON document and deserializes it with a colander schema.

    Args:
        path: The file to read.
        schema: The colander schema instance used for validation.

    Returns:
        The deserialized appstruct.

    Raises:
        ProfileParseError: The file cannot be read, is not valid JSON or does
            not conform to the schema.
    """
    try:
        with io.open(path, 'r', encoding='utf-8') as document_file:
            text = document_file.read()
    except (IOError, OSError) as error:
        raise ProfileParseError(path, 'cannot read file: {0}'.format(error))
    return parse_document(text, schema, path)


def parse_document(text, schema, path='<string>'):
    """
    Parses JSON text and deserializes it with a colander schema.
    """
    try:
        document = json.loads(text)
    except ValueError as error:
        raise ProfileParseError(
            path, error.msg if hasattr(error, 'msg') else str(error),
            line=getattr(error, 'lineno', None),
            column=getattr(error, 'colno', None))
    if not isinstance(document, dict):
        raise ProfileParseError(path, 'expected a JSON object')
    document = dict(
        (key, value) for key, value in document.items() if value is not None)
    try:
        return schema.deserialize(document)
    except colander.Invalid as error:
        field, message = sorted(error.asdict().items())[0]
        raise ProfileParseError(path, message, field=field)


def dump_document(document):
    return json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False)


def write_document(path, document):
    """
    Writes a document as indented JSON.
    """
    with io.open(path, 'w', encoding='utf-8') as document_file:
        document_file.write(dump_document(document))
