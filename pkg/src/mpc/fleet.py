"""Fleet-size selection, building assignment and visit tours.

The fleet objective is

    J_fleet(S) = sum_{i in S} cost_i(buildings assigned to i) + lambda_fleet * |S|

where every building goes to the drone of S whose start is nearest (ties to the lower drone
index) and cost_i is a per-drone delivery cost evaluator. With `flat_cost_evaluator` the
objective is the indicator sum of c_j plus the fleet penalty, taken literally.
"""
import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Tuple

import numpy as np

from src.mpc.optimizer import optimize
from src.utils.enumerators import EvaluatorType
from src.utils.errors import ScenarioError

logger = logging.getLogger(__name__)

MAX_FLEET_SEARCH = 16
# relative tolerance under which two subset objectives are considered tied
TIE_TOLERANCE = 1e-9


@dataclass
class FleetPlan:
    """Chosen drone subset with its building assignment and visit tours.

    Attributes:
        active_drones (tuple): indices of the drones in use, ascending
        assignment (dict): building index -> drone index (the indicator 1_ij)
        objective (float): smallest J_fleet over the subsets searched; the chosen subset lies
            within the tie tolerance of it
        per_drone_tours (dict): drone index -> ordered building indices
        per_drone_costs (dict): drone index -> evaluator cost of its buildings
        lambda_fleet (float): fleet penalty weight used
        subset_table (list): (subset, objective) for every subset searched, in search order
    """
    active_drones: Tuple[int, ...]
    assignment: Dict[int, int]
    objective: float
    per_drone_tours: Dict[int, List[int]] = field(default_factory=dict)
    per_drone_costs: Dict[int, float] = field(default_factory=dict)
    lambda_fleet: float = 0.0
    subset_table: List[Tuple[Tuple[int, ...], float]] = field(default_factory=list)

    @property
    def n_active(self):
        return len(self.active_drones)

    def buildings_of(self, drone):
        return sorted(j for j, i in self.assignment.items() if i == drone)

    def format_subset_table(self):
        lines = ['subset | drones | objective']
        for subset, objective in self.subset_table:
            marker = ' *' if subset == self.active_drones else ''
            lines.append(f'{subset} | {len(subset)} | {objective:.6f}{marker}')
        return '\n'.join(lines)


def flat_cost_evaluator(scenario, drone, buildings):
    """Sum of the delivery costs c_j of the assigned buildings (distance free)."""
    return float(sum(scenario.buildings[j].cost for j in buildings))


def start_distance_evaluator(scenario, drone, buildings):
    """Cost-weighted distance from the drone start to each assigned building."""
    if len(buildings) == 0:
        return 0.0
    idx = list(buildings)
    diff = scenario.building_positions[idx] - scenario.starts[drone]
    return float(np.sum(scenario.building_costs[idx] * np.sqrt(np.sum(diff * diff, axis=1))))


def weighted_geometric_median(points, weights, max_iterations=2000, tolerance=1e-12):
    """ Point minimising sum_j w_j ||p - points_j|| (Weiszfeld with the Vardi-Zhang fix for
    iterates landing on a data point).

    Parameters
    ----------
    points : numpy.ndarray
        Shape (m, 2).
    weights : numpy.ndarray
        Non-negative weights, shape (m,).

    Returns
    -------
    tuple
        (median, objective value)
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    weights = np.asarray(weights, dtype=float)
    keep = weights > 0
    points, weights = points[keep], weights[keep]
    if len(points) == 0:
        return np.zeros(2), 0.0
    if len(points) == 1:
        return points[0].copy(), 0.0
    y = np.sum(weights[:, None] * points, axis=0) / np.sum(weights)
    for _ in range(max_iterations):
        diff = points - y
        distances = np.sqrt(np.sum(diff * diff, axis=1))
        on_point = distances == 0.0
        far = ~on_point
        if not far.any():
            break
        inv = weights[far] / distances[far]
        T = np.sum(inv[:, None] * points[far], axis=0) / np.sum(inv)
        eta = float(np.sum(weights[on_point]))
        if eta == 0.0:
            new_y = T
        else:
            R = np.sum(inv[:, None] * diff[far], axis=0)
            r = float(np.sqrt(R @ R))
            if r <= eta:
                # the data point under y satisfies the optimality condition
                break
            new_y = (1.0 - eta / r) * T + (eta / r) * y
        step = float(np.sqrt(np.sum((new_y - y)**2)))
        y = new_y
        if step < tolerance:
            break
    diff = points - y
    return y, float(np.sum(weights * np.sqrt(np.sum(diff * diff, axis=1))))


class FinalStateEvaluator(object):
    """Delivery cost of a drone at its best final state, plus the flight needed to get there.

    cost_i(S_i) = min_p sum_{j in S_i} c_j ||p - b_j|| + reach_weight * ||p - x_{i,0}||

    The first term is the delivery cost the optimizer drives down for the drone's final state;
    the second charges reach_weight per grid unit flown from the start.
    """
    def __init__(self, reach_weight=1.0, max_iterations=2000, tolerance=1e-12):
        if reach_weight < 0:
            raise ValueError(f'reach_weight must be non-negative, got {reach_weight}')
        self.reach_weight = float(reach_weight)
        self.max_iterations = max_iterations
        self.tolerance = tolerance

    def __call__(self, scenario, drone, buildings):
        idx = list(buildings)
        if len(idx) == 0:
            return 0.0
        points = np.vstack([scenario.building_positions[idx], scenario.starts[drone][None, :]])
        weights = np.append(scenario.building_costs[idx], self.reach_weight)
        _, value = weighted_geometric_median(points, weights, self.max_iterations,
                                             self.tolerance)
        return value


def make_evaluator(evaluator_type=EvaluatorType.FINAL_STATE, reach_weight=1.0):
    evaluator_type = EvaluatorType(evaluator_type)
    if evaluator_type == EvaluatorType.FLAT:
        return flat_cost_evaluator
    if evaluator_type == EvaluatorType.START_DISTANCE:
        return start_distance_evaluator
    return FinalStateEvaluator(reach_weight=reach_weight)


def nearest_drone_assignment(scenario, drones):
    """ building index -> nearest drone of `drones` (by start position, ties to the lower
    drone index). """
    drones = sorted(drones)
    starts = scenario.starts[drones]
    assignment = {}
    for j, position in enumerate(scenario.building_positions):
        diff = starts - position
        distances = np.sqrt(np.sum(diff * diff, axis=1))
        # argmin returns the first minimum, i.e. the lower drone index
        assignment[j] = drones[int(np.argmin(distances))]
    return assignment


def _cost_function(evaluator, scenario):
    if isinstance(evaluator, Mapping):
        return lambda drone, buildings: float(evaluator[drone](buildings))
    return lambda drone, buildings: float(evaluator(scenario, drone, buildings))


def select_fleet(scenario, lambda_fleet=None, per_drone_costs=None):
    """ Choose the drone subset minimising the fleet objective.

    Parameters
    ----------
    scenario : Scenario
    lambda_fleet : float (optional)
        Penalty per drone used; defaults to the scenario lambda.
    per_drone_costs : callable or dict (optional)
        Either evaluator(scenario, drone, buildings) -> float, or a mapping
        drone -> f(buildings) -> float. Defaults to FinalStateEvaluator().

    Returns
    -------
    FleetPlan
        Plan with its tours; ties are broken toward fewer drones, then the
        lexicographically smaller subset.
    """
    if scenario.n_buildings == 0:
        raise ScenarioError('select_fleet needs at least one building')
    if scenario.n_drones > MAX_FLEET_SEARCH:
        raise ValueError(f'exhaustive fleet search supports at most {MAX_FLEET_SEARCH} drones, '
                         f'got {scenario.n_drones}')
    lambda_fleet = scenario.lambda_ if lambda_fleet is None else float(lambda_fleet)
    if lambda_fleet < 0:
        raise ValueError(f'lambda_fleet must be non-negative, got {lambda_fleet}')
    cost_of = _cost_function(per_drone_costs or FinalStateEvaluator(), scenario)
    cache = {}

    def drone_cost(drone, buildings):
        key = (drone, buildings)
        if key not in cache:
            cache[key] = cost_of(drone, buildings)
        return cache[key]

    searched = []
    for size in range(1, scenario.n_drones + 1):
        for subset in combinations(range(scenario.n_drones), size):
            assignment = nearest_drone_assignment(scenario, subset)
            costs = {i: drone_cost(i, tuple(j for j, d in assignment.items() if d == i))
                     for i in subset}
            objective = sum(costs[i] for i in subset) + lambda_fleet * size
            searched.append((subset, objective, assignment, costs))

    # search order is fewer drones first, then lexicographic
    objective = min(entry[1] for entry in searched)
    window = objective + TIE_TOLERANCE * max(1.0, abs(objective))
    subset, _, assignment, costs = next(entry for entry in searched if entry[1] <= window)
    plan = FleetPlan(active_drones=subset,
                     assignment=assignment,
                     objective=objective,
                     per_drone_costs=costs,
                     lambda_fleet=lambda_fleet,
                     subset_table=[(entry[0], entry[1]) for entry in searched])
    plan.per_drone_tours = extract_tour(plan, scenario)
    logger.info('fleet for %s: drones %s, objective %.6f (lambda_fleet=%g)', scenario.name,
                list(subset), objective, lambda_fleet)
    return plan


def extract_tour(plan, scenario):
    """ Nearest-neighbour visit order of every active drone over its assigned buildings,
    starting at the drone's start. Ties go to the lower building index.

    Returns
    -------
    dict
        drone index -> ordered list of building indices.
    """
    positions = scenario.building_positions
    tours = {}
    for drone in plan.active_drones:
        remaining = plan.buildings_of(drone)
        current = scenario.starts[drone]
        tour = []
        while remaining:
            best_j, best_d = None, math.inf
            for j in remaining:
                d = math.hypot(positions[j][0] - current[0], positions[j][1] - current[1])
                if d < best_d:
                    best_j, best_d = j, d
            tour.append(best_j)
            remaining.remove(best_j)
            current = positions[best_j]
        tours[drone] = tour
    return tours


def tour_length(scenario, drone, tour):
    points = [scenario.starts[drone]] + [scenario.building_positions[j] for j in tour]
    return float(sum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(points, points[1:])))


@dataclass
class FleetRun:
    """MPC pipeline outcome: the fleet plan and the optimisation of its active drones."""
    plan: FleetPlan
    result: object
    lambda_fleet: float

    @property
    def total_cost(self):
        # final J of the active drones plus the fleet penalty
        return self.result.final_cost.total + self.lambda_fleet * self.plan.n_active


def plan_fleet(scenario, config=None, lambda_fleet=None, evaluator=None):
    """ Select the fleet, then optimize the trajectories of the active drones with the
    delivery term restricted to each drone's assigned buildings.

    Returns
    -------
    FleetRun
        The plan, the OptimizationResult (trajectories indexed like plan.active_drones) and
        the fleet penalty used.
    """
    plan = select_fleet(scenario, lambda_fleet, evaluator)
    active = list(plan.active_drones)
    position = {drone: k for k, drone in enumerate(active)}
    sub_scenario = scenario.with_drones(active)
    sub_assignment = {j: position[i] for j, i in plan.assignment.items()}
    result = optimize(sub_scenario, config, sub_assignment)
    return FleetRun(plan=plan, result=result, lambda_fleet=plan.lambda_fleet)
