# -*- coding: utf-8 -*-
"""
This module holds the main method: config and service declarations of the
HTTP plan API.
"""

import os

from pyramid.config import Configurator

from edgesplit.business.plan_service import PlanService
from edgesplit.business.planner import EXHAUSTIVE
from edgesplit.data.repository.profile_repository import (
    fixture_path,
    load_scenario,
)


__version__ = open(os.path.join(os.path.abspath(
    os.path.dirname(__file__)), '../VERSION')).read().strip()


def scenario_settings(settings):
    """
    The scenario and tables paths of the settings, overridden by the
    EDGESPLIT_SCENARIO and EDGESPLIT_TABLES environment variables.
    """
    scenario = os.environ.get(
        'EDGESPLIT_SCENARIO', settings.get('edgesplit.scenario'))
    tables = os.environ.get(
        'EDGESPLIT_TABLES', settings.get('edgesplit.tables')) or None
    return scenario, tables


def main(global_config, **settings):
    """ This function returns a Pyramid WSGI application.
    """
    config = Configurator(settings=settings)
    config.include('cornice')
    config.add_renderer(
        name='csv', factory='edgesplit.presentation.renderers.CSVRenderer')

    scenario_path, tables_path = scenario_settings(settings)
    if not scenario_path:
        scenario_path = fixture_path('scenario-vgg16-tx2.json')

    plan_service = settings.get('edgesplit.plan_service')
    if plan_service is None:
        plan_service = PlanService(
            lambda: load_scenario(scenario_path, tables_path),
            solver=settings.get('edgesplit.solver', EXHAUSTIVE))
    config.registry.plan_service = plan_service

    config.scan('edgesplit.presentation', ignore='.tests')
    return config.make_wsgi_app()
