# -*- coding: utf-8 -*-
"""
Defines the exceptions of the edge/cloud transport.
"""


class WireError(IOError):
    """
    A message cannot be framed or read from the connection.
    """
    pass


class ConnectionClosedError(WireError):
    """
    The peer closed the connection.
    """
    pass


class EpochMismatchError(WireError):
    """
    A feature block was sent under another plan epoch than the receiver's.
    """

    def __init__(self, sent, current):
        super(EpochMismatchError, self).__init__(
            'epoch mismatch: block of epoch {0}, current epoch {1}'.format(
                sent, current))
        self.sent = sent
        self.current = current


class SyncTimeoutError(WireError):
    """
    The peer did not acknowledge a plan synchronization in time.
    """
    pass


class RemoteError(WireError):
    """
    The peer answered with an ERROR message.
    """

    def __init__(self, reason, epoch=None):
        super(RemoteError, self).__init__(reason)
        self.reason = reason
        self.epoch = epoch
