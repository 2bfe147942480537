# -*- coding: utf-8 -*-
"""
The edge side of the decoupled pipeline.

The agent hosts the adaptation controller since it observes the upload
bandwidth. For every request it runs the stub edge computation, compresses
the feature map of the planned split point and sends it to the cloud
service under the current plan epoch.

The agent listens to plan changes of the controller and synchronizes the new
plan before the next request.

Epochs on the wire are the controller epoch plus an offset. When the cloud
reports a larger epoch, e.g. after another agent synchronized, the offset
is raised so that the agent's next plan supersedes it.
"""

from dataclasses import dataclass
import logging
import socket
import time

from edgesplit.business.planner import decision_record
from edgesplit.transport import wire
from edgesplit.transport.exceptions import (
    EpochMismatchError,
    RemoteError,
    SyncTimeoutError,
    WireError,
)
from edgesplit.transport.pipeline import split_payload


LOG = logging.getLogger(__name__)
REQUEST_LOG = logging.getLogger('edgesplit.requests')


@dataclass(frozen=True)
class RequestResult(object):
    """
    The outcome of one transported request. Times are wall-clock seconds.
    """

    request_id: int
    epoch: int
    split_layer: int
    bit_depth: int
    bytes_sent: int
    edge_s: float
    trans_s: float
    cloud_s: float
    digest: str
    attempts: int

    @property
    def total_s(self):
        return self.edge_s + self.trans_s + self.cloud_s


def log_request(result):
    REQUEST_LOG.info(
        'epoch=%d split=%d bits=%d bytes=%d edge_ms=%.3f trans_ms=%.3f '
        'cloud_ms=%.3f total_ms=%.3f',
        result.epoch, result.split_layer, result.bit_depth, result.bytes_sent,
        result.edge_s * 1e3, result.trans_s * 1e3, result.cloud_s * 1e3,
        result.total_s * 1e3)


class EdgeAgent(object):
    """
    Sends the requests of the edge to a cloud service, one at a time.
    """

    def __init__(self, host, port, controller, model, spec, time_scale=1.0,
                 sync_timeout=5.0, max_retries=3, retry_delay=0.05):
        """
        Initialises the EdgeAgent.

        Args:
            host: The host of the cloud service.
            port: The port of the cloud service.
            controller: The AdaptationController planning the split.
            model: The ModelProfile.
            spec: The GeneratorSpec producing the transmitted maps.
            time_scale: Scales the stub edge computation delays.
            sync_timeout: Seconds to wait for any answer of the cloud.
            max_retries: Attempts per request beyond the first one.
            retry_delay: Seconds to wait before reconnecting.
        """
        self.host = host
        self.port = port
        self.controller = controller
        self.model = model
        self.spec = spec
        self.time_scale = time_scale
        self.sync_timeout = sync_timeout
        self.max_retries = max_retries
        self.retry_delay = retry_delay
        self.results = []
        self.stats = {
            'requests': 0,
            'retries': 0,
            'reconnects': 0,
            'syncs': 0,
            'violations': 0,
        }
        self._socket = None
        self._epoch_offset = 0
        self._synced_epoch = None
        self._connected = False
        controller.on_change(self._plan_changed)

    @property
    def wire_epoch(self):
        return self.controller.epoch + self._epoch_offset

    @property
    def needs_sync(self):
        """
        True if the plan changed or the connection was reset since the last
        synchronization.
        """
        return self._synced_epoch is None

    def _plan_changed(self, decision, epoch):
        LOG.debug(
            'plan epoch %d: split %d bits %d pending synchronization',
            epoch, decision.split_layer, decision.bit_depth)
        self._synced_epoch = None

    def _supersede(self, cloud_epoch):
        if cloud_epoch >= self.wire_epoch:
            self._epoch_offset += cloud_epoch - self.wire_epoch + 1

    def _exchange(self, message):
        wire.send_message(self._socket, message)
        try:
            return wire.receive_message(self._socket)
        except socket.timeout:
            raise SyncTimeoutError(
                'no answer to {0} within {1} s'.format(
                    message.type_name, self.sync_timeout))

    def connect(self):
        """
        Connects to the cloud service and synchronizes the plan.
        """
        self.close()
        if self._connected:
            self.stats['reconnects'] += 1
        self._connected = True
        self._socket = socket.create_connection(
            (self.host, self.port), timeout=self.sync_timeout)
        reply = self._exchange(wire.WireMessage(
            wire.HELLO, epoch=self.wire_epoch))
        if reply.message_type != wire.HELLO:
            raise WireError('expected HELLO, got {0}'.format(reply.type_name))
        self._supersede(reply.epoch)
        LOG.info(
            'connected to %s:%d, cloud epoch %d', self.host, self.port,
            reply.epoch)
        self.sync()

    def sync(self):
        """
        Synchronizes the current plan with the cloud service.

        Raises:
            SyncTimeoutError: The cloud does not answer in time.
        """
        while True:
            decision, _ = self.controller.current()
            if decision is None:
                raise WireError('no plan to synchronize')
            epoch = self.wire_epoch
            reply = self._exchange(wire.WireMessage(
                wire.PLAN_SYNC, epoch=epoch,
                body=decision_record(decision, epoch).encode('utf-8')))
            if reply.message_type != wire.PLAN_SYNC:
                _raise_for_reply(reply, epoch)
            self.stats['syncs'] += 1
            document = reply.json()
            agreed = (document.get('split_layer'), document.get('bit_depth'))
            if reply.epoch == epoch and agreed == (
                    decision.split_layer, decision.bit_depth):
                self._synced_epoch = epoch
                return epoch
            self._supersede(reply.epoch)

    def close(self):
        if self._socket is not None:
            try:
                self._socket.close()
            finally:
                self._socket = None
                self._synced_epoch = None

    def process(self, request_id, bandwidth=None):
        """
        Runs one request.

        Args:
            request_id: The request id, also the sample id of the map.
            bandwidth: Optional. The current bandwidth, triggers re-planning.

        Returns:
            The RequestResult.

        Raises:
            WireError: The request failed on every attempt.
        """
        if bandwidth is not None:
            self.controller.replan(bandwidth)
        last_error = None
        for attempt in range(1, self.max_retries + 2):
            if attempt > 1:
                self.stats['retries'] += 1
            try:
                if self._socket is None:
                    if attempt > 1:
                        time.sleep(self.retry_delay)
                    self.connect()
                if self.needs_sync:
                    self.sync()
                result = self._send(request_id, attempt)
            except EpochMismatchError as error:
                LOG.info('request %d: %s, resynchronizing', request_id, error)
                self._supersede(error.current)
                self._synced_epoch = None
                last_error = error
                continue
            except RemoteError:
                raise
            except (OSError, WireError) as error:
                LOG.warning('request %d attempt %d failed: %s',
                            request_id, attempt, error)
                self.close()
                last_error = error
                continue
            self.results.append(result)
            self.stats['requests'] += 1
            log_request(result)
            return result
        raise WireError(
            'request {0} failed after {1} attempts: {2}'.format(
                request_id, self.max_retries + 1, last_error))

    def _send(self, request_id, attempt):
        decision, _ = self.controller.current()
        epoch = self.wire_epoch
        started = time.perf_counter()
        if self.time_scale > 0:
            time.sleep(
                self.controller.latency.edge(decision.split_layer)
                * self.time_scale)
        payload = split_payload(
            self.spec, self.model, decision.split_layer, decision.bit_depth,
            request_id)
        edge_s = time.perf_counter() - started
        sent = time.perf_counter()
        reply = self._exchange(wire.WireMessage(
            wire.FEATURE_BLOCK, epoch=epoch, request_id=request_id,
            body=payload))
        round_trip = time.perf_counter() - sent
        if reply.message_type != wire.RESULT:
            _raise_for_reply(reply, epoch)
        document = reply.json()
        if reply.epoch != epoch or document.get('epoch') != epoch:
            self.stats['violations'] += 1
            LOG.error(
                'request %d sent under epoch %d answered under epoch %s',
                request_id, epoch, document.get('epoch'))
        cloud_s = float(document.get('cloud_s', 0.0))
        return RequestResult(
            request_id=request_id,
            epoch=epoch,
            split_layer=decision.split_layer,
            bit_depth=decision.bit_depth,
            bytes_sent=len(payload),
            edge_s=edge_s,
            trans_s=max(0.0, round_trip - cloud_s),
            cloud_s=cloud_s,
            digest=document['digest'],
            attempts=attempt)

    def run(self, n_requests, bandwidths=None, first_request=0):
        """
        Runs requests one after the other.

        Args:
            n_requests: The number of requests.
            bandwidths: Optional. The bandwidth of every request, repeated
                cyclically; re-plans whenever it changes.
            first_request: The id of the first request.

        Returns:
            The RequestResult of every request.
        """
        results = []
        for offset in range(n_requests):
            bandwidth = None
            if bandwidths:
                bandwidth = bandwidths[offset % len(bandwidths)]
            results.append(self.process(first_request + offset, bandwidth))
        return results

    def stats_line(self):
        return (
            'edge stats: epoch={0} requests={requests} retries={retries} '
            'reconnects={reconnects} syncs={syncs} '
            'violations={violations}'.format(self.wire_epoch, **self.stats))

    def stop(self):
        self.close()
        LOG.info(self.stats_line())


def _raise_for_reply(reply, epoch):
    if reply.message_type != wire.ERROR:
        raise WireError('unexpected {0} reply'.format(reply.type_name))
    document = reply.json()
    reason = document.get('reason', '')
    if reason.startswith('epoch mismatch'):
        raise EpochMismatchError(epoch, int(document.get('epoch', reply.epoch)))
    raise RemoteError(reason, document.get('epoch'))
