# -*- coding: utf-8 -*-
"""
Length-prefixed framing of the messages between edge agent and cloud
service.

Message layout, all integers little-endian::

    offset  size    field
    0       4       magic b'ESWM'
    4       1       message type
    5       3       reserved, zero
    8       8       plan epoch (uint64)
    16      4       request id (uint32)
    20      4       body length in bytes (uint32)
    24      length  body

FEATURE_BLOCK bodies are encoded blocks, all other bodies are UTF-8 JSON
objects.
"""

from dataclasses import dataclass
import json
import struct

from edgesplit.transport.exceptions import (
    ConnectionClosedError,
    WireError,
)


MAGIC = b'ESWM'
HEADER = struct.Struct('<4sB3xQII')
MAX_BODY = 1 << 28

HELLO = 1
PLAN_SYNC = 2
FEATURE_BLOCK = 3
RESULT = 4
ERROR = 5

MESSAGE_TYPES = {
    HELLO: 'HELLO',
    PLAN_SYNC: 'PLAN_SYNC',
    FEATURE_BLOCK: 'FEATURE_BLOCK',
    RESULT: 'RESULT',
    ERROR: 'ERROR',
}


@dataclass(frozen=True)
class WireMessage(object):
    """
    One framed message.

    Attributes:
        message_type: One of HELLO, PLAN_SYNC, FEATURE_BLOCK, RESULT, ERROR.
        epoch: The plan epoch of the sender.
        request_id: The request the message belongs to, 0 if none.
        body: The body bytes.
    """

    message_type: int
    epoch: int = 0
    request_id: int = 0
    body: bytes = b''

    @property
    def type_name(self):
        return MESSAGE_TYPES.get(self.message_type, str(self.message_type))

    def json(self):
        """
        Parses the JSON body.

        Raises:
            WireError: The body is not a JSON object.
        """
        try:
            document = json.loads(self.body.decode('utf-8'))
        except ValueError as error:
            raise WireError(
                'malformed {0} body: {1}'.format(self.type_name, error))
        if not isinstance(document, dict):
            raise WireError(
                'malformed {0} body: expected an object'.format(
                    self.type_name))
        return document


def json_message(message_type, document, epoch=0, request_id=0):
    return WireMessage(
        message_type, epoch, request_id,
        json.dumps(document, sort_keys=True).encode('utf-8'))


def pack_message(message):
    """
    Frames a message.
    """
    if message.message_type not in MESSAGE_TYPES:
        raise WireError('unknown message type {0}'.format(
            message.message_type))
    if len(message.body) > MAX_BODY:
        raise WireError('message body of {0} bytes exceeds {1}'.format(
            len(message.body), MAX_BODY))
    return HEADER.pack(
        MAGIC, message.message_type, message.epoch, message.request_id,
        len(message.body)) + message.body


def unpack_header(data):
    """
    Parses a message header.

    Returns:
        The tuple (message type, epoch, request id, body length).
    """
    magic, message_type, epoch, request_id, length = HEADER.unpack(data)
    if magic != MAGIC:
        raise WireError('bad magic {0!r}'.format(magic))
    if message_type not in MESSAGE_TYPES:
        raise WireError('unknown message type {0}'.format(message_type))
    if length > MAX_BODY:
        raise WireError('message body of {0} bytes exceeds {1}'.format(
            length, MAX_BODY))
    return message_type, epoch, request_id, length


def _receive_exactly(sock, size, at_boundary=False):
    chunks = []
    remaining = size
    while remaining:
        chunk = sock.recv(min(remaining, 1 << 16))
        if not chunk:
            if at_boundary and remaining == size:
                raise ConnectionClosedError('connection closed by peer')
            raise WireError(
                'truncated message: connection closed after {0} of {1} '
                'bytes'.format(size - remaining, size))
        chunks.append(chunk)
        remaining -= len(chunk)
    return b''.join(chunks)


def send_message(sock, message):
    sock.sendall(pack_message(message))


def receive_message(sock):
    """
    Reads one message from a socket.

    Raises:
        ConnectionClosedError: The peer closed the connection between two
            messages.
        WireError: The message is malformed or truncated.
    """
    message_type, epoch, request_id, length = unpack_header(
        _receive_exactly(sock, HEADER.size, at_boundary=True))
    body = _receive_exactly(sock, length) if length else b''
    return WireMessage(message_type, epoch, request_id, body)
