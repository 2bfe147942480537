# -*- coding: utf-8 -*-
"""
The cloud side of the decoupled pipeline.

The service accepts edge connections, keeps the synchronized plan and
answers feature blocks: it decodes and dequantizes the block, runs the stub
cloud computation and returns the digest of the reconstructed map.
"""

import logging
import socket
import socketserver
import threading
import time

from edgesplit.business.exceptions import PlanningError
from edgesplit.business.planner import parse_decision_record
from edgesplit.transport import wire
from edgesplit.transport.exceptions import (
    ConnectionClosedError,
    WireError,
)
from edgesplit.transport.pipeline import (
    digest,
    reconstruct,
)


LOG = logging.getLogger(__name__)


class PlanState(object):
    """
    The (split, bit-depth, epoch) snapshot shared by all connections. A
    synchronization with a smaller epoch than the current one is ignored, so
    is a different plan under the current epoch.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._epoch = 0
        self._split_layer = None
        self._bit_depth = None

    def snapshot(self):
        with self._lock:
            return self._epoch, self._split_layer, self._bit_depth

    def synchronize(self, epoch, split_layer, bit_depth):
        """
        Adopts a plan if its epoch is newer than the current one, or equal
        while no other plan holds it.

        Returns:
            The agreed snapshot.
        """
        with self._lock:
            current = (self._split_layer, self._bit_depth)
            if epoch > self._epoch or (
                    epoch == self._epoch
                    and current in ((None, None), (split_layer, bit_depth))):
                self._epoch = epoch
                self._split_layer = split_layer
                self._bit_depth = bit_depth
            return self._epoch, self._split_layer, self._bit_depth


def _plan_document(snapshot):
    epoch, split_layer, bit_depth = snapshot
    return {
        'epoch': epoch,
        'split_layer': split_layer,
        'bit_depth': bit_depth,
    }


class ServiceCounters(object):

    def __init__(self):
        self._lock = threading.Lock()
        self.connections = 0
        self.requests = 0
        self.errors = 0
        self.bytes_received = 0

    def add(self, **increments):
        with self._lock:
            for name, value in increments.items():
                setattr(self, name, getattr(self, name) + value)

    def as_dict(self):
        with self._lock:
            return {
                'connections': self.connections,
                'requests': self.requests,
                'errors': self.errors,
                'bytes_received': self.bytes_received,
            }


class CloudRequestHandler(socketserver.BaseRequestHandler):
    """
    Serves the messages of one edge connection until it is closed.
    """

    def setup(self):
        self.service = self.server.service
        self.service.register(self.request)

    def finish(self):
        self.service.unregister(self.request)

    def handle(self):
        self.service.counters.add(connections=1)
        while True:
            try:
                message = wire.receive_message(self.request)
            except ConnectionClosedError:
                return
            except (WireError, OSError) as error:
                LOG.warning('dropping connection: %s', error)
                return
            try:
                reply = self.service.dispatch(message)
            except WireError as error:
                self.service.counters.add(errors=1)
                reply = self.service.error(message, str(error))
            try:
                wire.send_message(self.request, reply)
            except OSError as error:
                LOG.warning('cannot reply: %s', error)
                return


class _Server(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


class CloudService(object):
    """
    Runs the cloud service on a TCP endpoint.
    """

    def __init__(self, host, port, latency=None, time_scale=1.0):
        """
        Initialises the CloudService.

        Args:
            host: The interface to listen on.
            port: The port, 0 for an ephemeral port.
            latency: Optional. The LatencyModel driving the stub cloud
                computation; without it no time is spent.
            time_scale: Scales the stub computation delays.
        """
        self.latency = latency
        self.time_scale = time_scale
        self.plan = PlanState()
        self.counters = ServiceCounters()
        self._connections = set()
        self._connections_lock = threading.Lock()
        self._server = _Server((host, port), CloudRequestHandler)
        self._server.service = self
        self._thread = None
        self._closed = False

    @property
    def address(self):
        return self._server.server_address[:2]

    def register(self, connection):
        with self._connections_lock:
            self._connections.add(connection)

    def unregister(self, connection):
        with self._connections_lock:
            self._connections.discard(connection)

    def dispatch(self, message):
        """
        Answers one message.

        Returns:
            The reply WireMessage.
        """
        if message.message_type == wire.HELLO:
            snapshot = self.plan.snapshot()
            return wire.json_message(
                wire.HELLO, _plan_document(snapshot), epoch=snapshot[0])
        if message.message_type == wire.PLAN_SYNC:
            return self._synchronize(message)
        if message.message_type == wire.FEATURE_BLOCK:
            return self._feature_block(message)
        raise WireError('unexpected {0} message'.format(message.type_name))

    def error(self, message, reason):
        epoch = self.plan.snapshot()[0]
        LOG.info(
            'request %d rejected: %s', message.request_id, reason)
        return wire.json_message(
            wire.ERROR, {'reason': reason, 'epoch': epoch},
            epoch=epoch, request_id=message.request_id)

    def _synchronize(self, message):
        try:
            decision, _ = parse_decision_record(message.body.decode('utf-8'))
        except (PlanningError, UnicodeDecodeError) as error:
            raise WireError(str(error))
        snapshot = self.plan.synchronize(
            message.epoch, decision.split_layer, decision.bit_depth)
        LOG.info(
            'plan sync: epoch %d split %s bits %s', *snapshot)
        return wire.json_message(
            wire.PLAN_SYNC, _plan_document(snapshot), epoch=snapshot[0])

    def _feature_block(self, message):
        epoch, split_layer, _ = self.plan.snapshot()
        self.counters.add(bytes_received=len(message.body))
        if message.epoch != epoch:
            self.counters.add(errors=1)
            return self.error(message, 'epoch mismatch')
        try:
            block, feature_map = reconstruct(message.body)
        except (ValueError, MemoryError) as error:
            self.counters.add(errors=1)
            return self.error(message, str(error))
        if block.layer_index != split_layer:
            self.counters.add(errors=1)
            return self.error(
                message, 'block of layer {0} does not match split {1}'.format(
                    block.layer_index, split_layer))
        started = time.perf_counter()
        if self.latency is not None and self.time_scale > 0:
            time.sleep(self.latency.cloud(split_layer) * self.time_scale)
        cloud_s = time.perf_counter() - started
        self.counters.add(requests=1)
        return wire.json_message(
            wire.RESULT,
            {
                'digest': digest(feature_map),
                'epoch': epoch,
                'split_layer': split_layer,
                'bit_depth': block.bit_depth,
                'cloud_s': cloud_s,
            },
            epoch=epoch, request_id=message.request_id)

    def stats_line(self):
        counters = self.counters.as_dict()
        return (
            'cloud stats: epoch={0} connections={1} requests={2} errors={3} '
            'bytes={4}'.format(
                self.plan.snapshot()[0], counters['connections'],
                counters['requests'], counters['errors'],
                counters['bytes_received']))

    def start(self):
        """
        Serves in a background thread.
        """
        self._thread = threading.Thread(
            target=self._server.serve_forever, name='cloud-service')
        self._thread.daemon = True
        self._thread.start()
        LOG.info('cloud service listening on %s:%d', *self.address)
        return self

    def serve_forever(self):
        """
        Serves in the calling thread until interrupted.
        """
        LOG.info('cloud service listening on %s:%d', *self.address)
        try:
            self._server.serve_forever()
        finally:
            self._close()

    def stop(self):
        """
        Stops the background thread, closes all connections and logs the
        stats line.
        """
        if self._thread is not None:
            self._server.shutdown()
            self._thread.join()
            self._thread = None
        self._close()

    def _close(self):
        if self._closed:
            return
        self._closed = True
        with self._connections_lock:
            connections = list(self._connections)
        for connection in connections:
            try:
                connection.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            connection.close()
        self._server.server_close()
        LOG.info(self.stats_line())
