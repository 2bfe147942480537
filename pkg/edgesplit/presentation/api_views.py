# -*- coding: utf-8 -*-
"""
REST API views of the plan service.

=========  ======  ===================================================
URL        Method  Description
=========  ======  ===================================================
/plan      POST    plan the configured scenario, JSON body with the
                   optional keys ``bandwidth`` and ``max_loss``
/status    GET     scenario, plan epoch and cloud service counters
/latency   GET     the latency vectors of the scenario as CSV
=========  ======  ===================================================

Bandwidths are bytes per second or strings with a unit suffix like
``300KBps``.
"""

import json

import colander
from cornice import Service

from edgesplit.business.planner import decision_record
from edgesplit.presentation.reports import latency_table
from edgesplit.utils import parse_bandwidth


plan = Service(
    name='plan', path='/plan', description='plan the configured scenario')
status = Service(
    name='status', path='/status', description='plan and service state')
latency = Service(
    name='latency', path='/latency', description='latency vectors as CSV')


def _positive_bandwidth(node, value):
    try:
        bandwidth = parse_bandwidth(value)
    except ValueError as error:
        raise colander.Invalid(node, str(error))
    if bandwidth <= 0:
        raise colander.Invalid(node, 'bandwidth must be > 0')


class PlanRequestSchema(colander.MappingSchema):
    bandwidth = colander.SchemaNode(
        colander.String(),
        missing=colander.drop,
        validator=_positive_bandwidth)
    max_loss = colander.SchemaNode(
        colander.Float(),
        missing=colander.drop,
        validator=colander.Range(
            min=0, min_err=u'accuracy budget must be ≥ 0'))


def plan_request_is_valid(request, **kwargs):
    """
    Validates the JSON body of a plan request.
    """
    if request.body:
        try:
            body = json.loads(request.body.decode('utf-8'))
        except ValueError:
            request.errors.add('body', 'body', 'invalid JSON')
            return
    else:
        body = {}
    if not isinstance(body, dict):
        request.errors.add('body', 'body', 'expected a JSON object')
        return
    if isinstance(body.get('bandwidth'), (int, float)):
        body['bandwidth'] = repr(body['bandwidth'])
    if isinstance(body.get('max_loss'), (int, float)):
        body['max_loss'] = repr(body['max_loss'])
    try:
        appstruct = PlanRequestSchema().deserialize(body)
    except colander.Invalid as error:
        for field, message in sorted(error.asdict().items()):
            request.errors.add('body', field, message)
        return
    if 'bandwidth' in appstruct:
        request.validated['bandwidth'] = parse_bandwidth(
            appstruct['bandwidth'])
    if 'max_loss' in appstruct:
        request.validated['max_loss'] = appstruct['max_loss']


@plan.post(validators=(plan_request_is_valid,))
def plan_view(request):
    """
    Plans the scenario and returns the decision record.
    """
    decision = request.registry.plan_service.plan(
        bandwidth=request.validated.get('bandwidth'),
        max_loss=request.validated.get('max_loss'))
    return json.loads(decision_record(decision))


@status.get()
def status_view(request):
    return request.registry.plan_service.status()


@latency.get(renderer='csv')
def latency_view(request):
    table = latency_table(request.registry.plan_service.latency_model())
    table['filename'] = 'latency'
    return table
