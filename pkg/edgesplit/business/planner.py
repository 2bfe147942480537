# -*- coding: utf-8 -*-
"""
Chooses the split point and bit-depth of minimal latency.

Every candidate (i, c) costs

    Z(i, c) = T_E_i + S_i(c) / BW + T_C_i

and is feasible if its accuracy loss A_i(c) does not exceed the budget. The
all-cloud row i = 0 uploads the input, loses no accuracy and is therefore
always feasible.

Exactly one candidate is selected, so the 0/1 program reduces to an argmin
over the feasible cells. ``solve`` computes it directly, ``solve_bnb`` runs
a branch-and-bound over linear relaxations and returns the same decision.
Equal costs are resolved towards the larger split point, then the larger
bit-depth.
"""

from collections import namedtuple
from dataclasses import dataclass
import json
import logging
import threading

import numpy as np
from scipy.optimize import linprog

from edgesplit.business.exceptions import (
    BandwidthError,
    DimensionMismatchError,
    InfeasibleGridError,
    PlanningError,
)
from edgesplit.business.latency import model_for_devices
from edgesplit.business.predictor import lookup_size


LOG = logging.getLogger(__name__)

EXHAUSTIVE = 'exhaustive'
BNB = 'bnb'
BASELINE = 'baseline'

# The bit-depth reported for the all-cloud split which uploads the input.
NO_BITS = 0

_PRUNE_TOLERANCE = 1e-6


class _Unchanged(object):

    def __repr__(self):
        return 'UNCHANGED'

    def __bool__(self):
        return False


UNCHANGED = _Unchanged()

PlanSnapshot = namedtuple('PlanSnapshot', ['decision', 'epoch'])


def _frozen(values, dtype=np.float64):
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class DecisionGrid(object):
    """
    The costs and feasibility of all candidates (i, c).

    Row i of the matrices holds split point i for i in 0..N, column k holds
    ``bit_depths[k]``. Row 0 is the all-cloud upload.

    Attributes:
        bit_depths: The ascending bit-depths of the columns.
        edge_s: T_E_i for i in 0..N.
        cloud_s: T_C_i for i in 0..N.
        trans_s: (N+1) x C transmission seconds.
        accuracy_loss: (N+1) x C predicted accuracy loss, row 0 is zero.
        max_loss: The accuracy budget.
        upload_bytes: Optional (N+1) x C predicted bytes on the wire.
        bandwidth: Optional. The bandwidth the grid was built for.
    """

    bit_depths: tuple
    edge_s: np.ndarray
    cloud_s: np.ndarray
    trans_s: np.ndarray
    accuracy_loss: np.ndarray
    max_loss: float
    upload_bytes: np.ndarray = None
    bandwidth: float = None

    def __post_init__(self):
        object.__setattr__(self, 'bit_depths', tuple(self.bit_depths))
        edge_s = _frozen(self.edge_s)
        cloud_s = _frozen(self.cloud_s)
        trans_s = _frozen(self.trans_s)
        accuracy_loss = _frozen(self.accuracy_loss)
        shape = (edge_s.size, len(self.bit_depths))
        if (cloud_s.shape != edge_s.shape or trans_s.shape != shape
                or accuracy_loss.shape != shape):
            raise DimensionMismatchError(
                'grid components do not share the shape {0}'.format(shape))
        if edge_s.size < 1 or not self.bit_depths:
            raise DimensionMismatchError('grid has no cells')
        for name, value in (('edge_s', edge_s), ('cloud_s', cloud_s),
                            ('trans_s', trans_s),
                            ('accuracy_loss', accuracy_loss)):
            object.__setattr__(self, name, value)
        if self.upload_bytes is not None:
            object.__setattr__(
                self, 'upload_bytes', _frozen(self.upload_bytes))
        # edge + trans + cloud, in this order for every reported total
        cost = (edge_s[:, np.newaxis] + trans_s) + cloud_s[:, np.newaxis]
        cost.setflags(write=False)
        feasible = accuracy_loss <= self.max_loss
        feasible[0, :] = True
        feasible.setflags(write=False)
        object.__setattr__(self, 'cost', cost)
        object.__setattr__(self, 'feasible', feasible)

    @property
    def n_layers(self):
        return self.edge_s.size - 1

    @property
    def shape(self):
        return self.cost.shape

    def decision(self, i, k, solver):
        """
        Builds the PlanDecision of cell (i, k) where k is a column index.
        """
        return PlanDecision(
            split_layer=int(i),
            bit_depth=self.bit_depths[k] if i else NO_BITS,
            edge_s=float(self.edge_s[i]),
            trans_s=float(self.trans_s[i, k]),
            cloud_s=float(self.cloud_s[i]),
            predicted_accuracy_loss=float(self.accuracy_loss[i, k]),
            predicted_bytes=(
                float(self.upload_bytes[i, k])
                if self.upload_bytes is not None else None),
            bandwidth=self.bandwidth,
            solver=solver)


@dataclass(frozen=True)
class PlanDecision(object):
    """
    A chosen split point and bit-depth with its predicted latency.

    The all-cloud split 0 carries the bit-depth NO_BITS.
    """

    split_layer: int
    bit_depth: int
    edge_s: float
    trans_s: float
    cloud_s: float
    predicted_accuracy_loss: float
    predicted_bytes: float = None
    bandwidth: float = None
    solver: str = EXHAUSTIVE

    @property
    def total_s(self):
        return self.edge_s + self.trans_s + self.cloud_s

    @property
    def cell(self):
        return (self.split_layer, self.bit_depth)

    @property
    def is_all_cloud(self):
        return self.split_layer == 0


def check_bandwidth(bandwidth):
    if not bandwidth > 0:
        raise BandwidthError(
            'bandwidth must be > 0, not {0}'.format(bandwidth))


def build_grid(model, latency, tables, bandwidth, max_loss,
               encoded_upload=True, rtt=0.0):
    """
    Builds the decision grid of a model at a bandwidth.

    Args:
        model: The ModelProfile.
        latency: The LatencyModel of the device pair.
        tables: The LookupTables of the model.
        bandwidth: The current bandwidth in bytes per second.
        max_loss: The accuracy budget.
        encoded_upload: The all-cloud row uploads the encoded input if True,
            else the raw input.
        rtt: Optional. A fixed round trip time added to every transmission.

    Returns:
        The DecisionGrid.

    Raises:
        DimensionMismatchError: The latency model or the tables do not match
            the model.
        BandwidthError: The bandwidth is not strictly positive.
    """
    check_bandwidth(bandwidth)
    n_points = model.n_points
    if latency.n_layers != n_points:
        raise DimensionMismatchError(
            'latency model has N={0}, model "{1}" has N={2}'.format(
                latency.n_layers, model.model_name, n_points))
    if tables.n_layers != n_points:
        raise DimensionMismatchError(
            'lookup tables have N={0}, model "{1}" has N={2}'.format(
                tables.n_layers, model.model_name, n_points))
    columns = len(tables.bit_depths)
    sizes = np.empty((n_points + 1, columns))
    sizes[0, :] = lookup_size(tables, 0, None, encoded=encoded_upload)
    sizes[1:, :] = tables.expected_size
    loss = np.zeros((n_points + 1, columns))
    loss[1:, :] = tables.accuracy_loss
    return DecisionGrid(
        bit_depths=tables.bit_depths,
        edge_s=latency.edge_prefix,
        cloud_s=latency.cloud_suffix,
        trans_s=sizes / bandwidth + rtt,
        accuracy_loss=loss,
        max_loss=max_loss,
        upload_bytes=sizes,
        bandwidth=bandwidth)


def solve(grid):
    """
    Selects the feasible cell of minimal cost.

    Args:
        grid: The DecisionGrid.

    Returns:
        The PlanDecision. Equal costs resolve to the larger split point, then
        the larger bit-depth.

    Raises:
        InfeasibleGridError: No cell is feasible.
    """
    if not grid.feasible.any():
        raise InfeasibleGridError('decision grid has no feasible cell')
    masked = np.where(grid.feasible, grid.cost, np.inf)
    best = masked.min()
    rows, columns = np.nonzero(masked == best)
    # row-major order: the last candidate has the largest i, then largest c
    return grid.decision(rows[-1], columns[-1], EXHAUSTIVE)


def _key(grid, index):
    i, k = divmod(index, grid.cost.shape[1])
    return (grid.cost[i, k], -i, -k)


def solve_bnb(grid):
    """
    Selects the feasible cell of minimal cost by branch-and-bound.

    Each node solves the linear relaxation

        min cost . x  s.t.  sum(x) = 1,  loss . x <= budget,  0 <= x <= ub

    where branching fixes variables to zero. The variable of largest value
    in the relaxed solution is branched on: fixing it to one yields a leaf
    which is compared with the incumbent, fixing it to zero yields a child
    node. Cells whose own loss exceeds the budget cannot be part of any
    selection and start fixed to zero.

    Returns:
        The same PlanDecision as ``solve`` apart from the solver name.

    Raises:
        InfeasibleGridError: No cell is feasible.
    """
    cost = grid.cost.ravel()
    loss = grid.accuracy_loss.ravel()
    upper = grid.feasible.ravel().astype(np.float64)
    if not upper.any():
        raise InfeasibleGridError('decision grid has no feasible cell')
    # row 0 is feasible by definition, whatever its loss entries say
    loss = np.where(grid.feasible.ravel(), np.minimum(loss, grid.max_loss),
                    loss)
    equality = np.ones((1, cost.size))
    inequality = loss[np.newaxis, :]
    incumbent = None
    nodes = 0
    stack = [upper]
    while stack:
        bounds_upper = stack.pop()
        if not bounds_upper.any():
            continue
        nodes += 1
        result = linprog(
            cost,
            A_ub=inequality, b_ub=[grid.max_loss],
            A_eq=equality, b_eq=[1.0],
            bounds=np.column_stack((np.zeros(cost.size), bounds_upper)),
            method='highs')
        if result.status != 0:
            continue
        if incumbent is not None:
            limit = grid.cost.flat[incumbent]
            if result.fun > limit + _PRUNE_TOLERANCE * max(1.0, abs(limit)):
                continue
        branch = int(np.argmax(np.where(bounds_upper > 0, result.x, -1.0)))
        if grid.feasible.flat[branch] and (
                incumbent is None
                or _key(grid, branch) < _key(grid, incumbent)):
            incumbent = branch
        child = bounds_upper.copy()
        child[branch] = 0.0
        stack.append(child)
    if incumbent is None:
        raise InfeasibleGridError('decision grid has no feasible cell')
    LOG.debug('branch-and-bound explored %d nodes', nodes)
    i, k = divmod(incumbent, grid.cost.shape[1])
    return grid.decision(i, k, BNB)


SOLVERS = {
    EXHAUSTIVE: solve,
    BNB: solve_bnb,
}


def get_solver(name):
    try:
        return SOLVERS[name]
    except KeyError:
        raise PlanningError(
            'unknown solver "{0}", expected one of {1}'.format(
                name, ', '.join(sorted(SOLVERS))))


def baseline_decision(latency, tables, bandwidth, encoded, rtt=0.0):
    """
    The all-cloud decision uploading the raw or the encoded input.

    The cost is computed like the cells of a decision grid, so an all-cloud
    plan and the baseline of the same upload size cost exactly the same.
    """
    check_bandwidth(bandwidth)
    size = float(lookup_size(tables, 0, None, encoded=encoded))
    return PlanDecision(
        split_layer=0,
        bit_depth=NO_BITS,
        edge_s=latency.edge(0),
        trans_s=size / bandwidth + rtt,
        cloud_s=latency.cloud(0),
        predicted_accuracy_loss=0.0,
        predicted_bytes=size,
        bandwidth=bandwidth,
        solver=BASELINE)


def plan_scenario(scenario, bandwidth=None, max_loss=None, solver=EXHAUSTIVE,
                  latency=None):
    """
    Plans a scenario at a bandwidth.

    Args:
        scenario: The Scenario.
        bandwidth: Optional. Defaults to the first bandwidth of the trace.
        max_loss: Optional. Defaults to the accuracy budget of the scenario.
        solver: ``exhaustive`` or ``bnb``.
        latency: Optional. A prebuilt LatencyModel of the scenario devices.

    Returns:
        The PlanDecision.
    """
    if bandwidth is None:
        bandwidth = scenario.bandwidth_at(0)
    if max_loss is None:
        max_loss = scenario.accuracy_budget
    if latency is None:
        latency = model_for_devices(
            scenario.model, scenario.edge, scenario.cloud)
    grid = build_grid(
        scenario.model, latency, scenario.tables, bandwidth, max_loss)
    return get_solver(solver)(grid)


class AdaptationController(object):
    """
    Re-plans the split when the bandwidth changes.

    The controller holds the current decision and a plan epoch which is
    incremented whenever the selected cell changes. Readers get a
    consistent (decision, epoch) snapshot; plan changes are serialized.
    """

    def __init__(self, model, latency, tables, max_loss, solver=EXHAUSTIVE,
                 rtt=0.0):
        """
        Initialises the AdaptationController.

        Args:
            model: The ModelProfile.
            latency: The LatencyModel of the device pair.
            tables: The LookupTables of the model.
            max_loss: The accuracy budget.
            solver: The name of the solver, ``exhaustive`` or ``bnb``.
            rtt: Optional. A fixed round trip time added to transmissions.
        """
        self._model = model
        self._latency = latency
        self._tables = tables
        self._max_loss = max_loss
        self._solve = get_solver(solver)
        self._rtt = rtt
        self._lock = threading.RLock()
        self._decision = None
        self._epoch = 0
        self._listeners = []

    @classmethod
    def for_scenario(cls, scenario, max_loss=None, solver=EXHAUSTIVE,
                     rtt=0.0):
        return cls(
            scenario.model,
            model_for_devices(scenario.model, scenario.edge, scenario.cloud),
            scenario.tables,
            scenario.accuracy_budget if max_loss is None else max_loss,
            solver=solver,
            rtt=rtt)

    @property
    def latency(self):
        return self._latency

    @property
    def max_loss(self):
        return self._max_loss

    @property
    def epoch(self):
        with self._lock:
            return self._epoch

    def current(self):
        """
        The current (decision, epoch) snapshot. The decision is None before
        the first plan.
        """
        with self._lock:
            return PlanSnapshot(self._decision, self._epoch)

    def on_change(self, listener):
        """
        Registers a callable receiving (decision, epoch) on every plan
        change. Listeners run while plan changes are locked out.
        """
        with self._lock:
            self._listeners.append(listener)

    def plan(self, bandwidth):
        """
        Computes the decision for a bandwidth without changing the state.
        """
        grid = build_grid(
            self._model, self._latency, self._tables, bandwidth,
            self._max_loss, rtt=self._rtt)
        return self._solve(grid)

    def replan(self, bandwidth):
        """
        Re-plans for a new bandwidth.

        Args:
            bandwidth: The new bandwidth in bytes per second.

        Returns:
            The new PlanDecision if the selected cell changed, else
            UNCHANGED. The predicted latency of an unchanged cell is updated
            without a new epoch.

        Raises:
            BandwidthError: The bandwidth is not strictly positive.
        """
        decision = self.plan(bandwidth)
        with self._lock:
            if (self._decision is not None
                    and self._decision.cell == decision.cell):
                self._decision = decision
                return UNCHANGED
            previous = self._decision
            self._decision = decision
            self._epoch += 1
            LOG.info(
                'plan epoch %d: split %d bits %d at %.0f B/s, predicted '
                '%.3f ms (was %s)',
                self._epoch, decision.split_layer, decision.bit_depth,
                bandwidth, decision.total_s * 1e3,
                previous.cell if previous is not None else None)
            for listener in self._listeners:
                listener(decision, self._epoch)
            return decision


def decision_record(decision, epoch=None):
    """
    Serializes a decision to the JSON plan record.
    """
    record = {
        'split_layer': decision.split_layer,
        'bit_depth': decision.bit_depth,
        'edge_s': decision.edge_s,
        'trans_s': decision.trans_s,
        'cloud_s': decision.cloud_s,
        'total_s': decision.total_s,
        'predicted_accuracy_loss': decision.predicted_accuracy_loss,
        'predicted_bytes': decision.predicted_bytes,
        'bandwidth': decision.bandwidth,
        'solver': decision.solver,
    }
    if epoch is not None:
        record['epoch'] = epoch
    return json.dumps(record, sort_keys=True)


def parse_decision_record(text):
    """
    Parses a JSON plan record.

    Returns:
        The tuple (PlanDecision, epoch), epoch is None if absent.

    Raises:
        PlanningError: The record is malformed.
    """
    try:
        record = json.loads(text)
        decision = PlanDecision(
            split_layer=int(record['split_layer']),
            bit_depth=int(record['bit_depth']),
            edge_s=float(record['edge_s']),
            trans_s=float(record['trans_s']),
            cloud_s=float(record['cloud_s']),
            predicted_accuracy_loss=float(record['predicted_accuracy_loss']),
            predicted_bytes=record.get('predicted_bytes'),
            bandwidth=record.get('bandwidth'),
            solver=record.get('solver', EXHAUSTIVE))
    except (KeyError, TypeError, ValueError) as error:
        raise PlanningError('malformed plan record: {0}'.format(error))
    return decision, record.get('epoch')
