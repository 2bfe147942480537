# -*- coding: utf-8 -*-
"""
Serves plan decisions for a configured scenario.
"""

import logging
import threading

from edgesplit.business.latency import model_for_devices
from edgesplit.business.planner import (
    EXHAUSTIVE,
    plan_scenario,
)


LOG = logging.getLogger(__name__)


class PlanService(object):
    """
    Plans the scenario loaded by a scenario loader.

    The scenario is loaded on first use and kept afterwards.
    """

    def __init__(self, scenario_loader, solver=EXHAUSTIVE, cloud_service=None):
        """
        Initialises the PlanService.

        Args:
            scenario_loader: Callable without arguments returning the
                Scenario.
            solver: The planner solver, ``exhaustive`` or ``bnb``.
            cloud_service: Optional. The CloudService whose counters are
                reported by ``status``.
        """
        self._scenario_loader = scenario_loader
        self._solver = solver
        self._lock = threading.Lock()
        self._scenario = None
        self._latency = None
        self.cloud_service = cloud_service

    def _load(self):
        with self._lock:
            if self._scenario is None:
                scenario = self._scenario_loader()
                self._latency = model_for_devices(
                    scenario.model, scenario.edge, scenario.cloud)
                self._scenario = scenario
                LOG.info('plan service loaded scenario %s', scenario.name)
            return self._scenario, self._latency

    @property
    def scenario(self):
        return self._load()[0]

    def plan(self, bandwidth=None, max_loss=None):
        """
        Plans the scenario.

        Args:
            bandwidth: Optional. Bytes per second, defaults to the start of
                the scenario's bandwidth trace.
            max_loss: Optional. Defaults to the scenario's accuracy budget.

        Returns:
            The PlanDecision.
        """
        scenario, latency = self._load()
        return plan_scenario(
            scenario, bandwidth=bandwidth, max_loss=max_loss,
            solver=self._solver, latency=latency)

    def latency_model(self):
        return self._load()[1]

    def status(self):
        """
        The state of the scenario and, if attached, of the cloud service.
        """
        status = {
            'scenario': self.scenario.name,
            'model': self.scenario.model.model_name,
            'epoch': None,
            'split_layer': None,
            'bit_depth': None,
            'cloud': None,
        }
        if self.cloud_service is not None:
            epoch, split_layer, bit_depth = (
                self.cloud_service.plan.snapshot())
            status.update(
                epoch=epoch,
                split_layer=split_layer,
                bit_depth=bit_depth,
                cloud=self.cloud_service.counters.as_dict())
        return status
