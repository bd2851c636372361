"""Cost terms of the delivery problem and their analytic gradients.

The functions taking `trajectories` accept a list of DroneTrajectory. The array versions
(`*_from_arrays`) work on stacked states of shape (n, N+1, 2) and controls of shape (n, N, 2)
and are what the optimizer calls at every iteration.
"""
import logging
from dataclasses import dataclass

import numpy as np

from src.trajectory import stack_controls, stack_states

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CostBreakdown:
    """The three cost terms and their total J = delivery + restricted + penalty."""
    delivery: float
    restricted: float
    penalty: float
    total: float

    @classmethod
    def from_terms(cls, delivery, restricted, penalty):
        delivery, restricted, penalty = float(delivery), float(restricted), float(penalty)
        # fixed summation order
        return cls(delivery, restricted, penalty, (delivery + restricted) + penalty)

    def is_finite(self):
        return bool(np.isfinite([self.delivery, self.restricted, self.penalty, self.total]).all())

    def as_row(self):
        return [self.delivery, self.restricted, self.penalty, self.total]


@dataclass
class CostGradient:
    """Partial derivatives of J with respect to every state and every control.

    Attributes:
        states (np.ndarray): dJ/dx_i(t), shape (n, N+1, 2)
        controls (np.ndarray): dJ/du_i(t), shape (n, N, 2)
        coincidences (int): number of norm terms evaluated at distance 0 (zero subgradient used)
    """
    states: np.ndarray
    controls: np.ndarray
    coincidences: int = 0


def delivery_weights(costs, n_drones, assignment=None):
    """ Weight of every (drone, building) pair in the delivery term.

    Parameters
    ----------
    costs : numpy.ndarray
        Building costs c_j, shape (M,).
    n_drones : int
        Number of drones.
    assignment : dict (optional)
        building index -> drone index. When given only assigned pairs count (indicator
        1_ij); otherwise every drone pays for every building.

    Returns
    -------
    numpy.ndarray
        Weights of shape (n, M).
    """
    costs = np.asarray(costs, dtype=float)
    if assignment is None:
        return np.tile(costs, (n_drones, 1))
    weights = np.zeros((n_drones, len(costs)))
    for j, i in assignment.items():
        weights[i, j] = costs[j]
    return weights


def delivery_cost_from_arrays(states, buildings, weights):
    diff = states[:, -1, None, :] - buildings[None, :, :]
    distances = np.sqrt(np.sum(diff * diff, axis=-1))
    return float(np.sum(weights * distances))


def restricted_cost_from_arrays(states, zones, d_min):
    if len(zones) == 0:
        return 0.0
    # t = 1..N; the start state is not penalised
    diff = states[:, 1:, None, :] - zones[None, None, :, :]
    distances = np.sqrt(np.sum(diff * diff, axis=-1))
    return float(np.sum(np.maximum(d_min - distances, 0.0)))


def control_penalty_from_arrays(controls, lambda_ctrl):
    # t = 1..N-1; u(0) carries no penalty
    counted = controls[:, 1:]
    return float(lambda_ctrl * np.sum(counted * counted))


def total_cost_from_arrays(states, controls, buildings, weights, zones, d_min, lambda_ctrl):
    return CostBreakdown.from_terms(delivery_cost_from_arrays(states, buildings, weights),
                                    restricted_cost_from_arrays(states, zones, d_min),
                                    control_penalty_from_arrays(controls, lambda_ctrl))


def _unit_vectors(diff):
    """Unit vectors along `diff` (last axis) and a mask of the zero-length ones."""
    norms = np.sqrt(np.sum(diff * diff, axis=-1))
    zero = norms == 0.0
    safe = np.where(zero, 1.0, norms)
    units = diff / safe[..., None]
    units[zero] = 0.0
    return units, norms, zero


def gradient_from_arrays(states, controls, buildings, weights, zones, d_min, lambda_ctrl):
    grad_states = np.zeros_like(states)
    coincidences = 0

    # delivery: final state only
    units, _, zero = _unit_vectors(states[:, -1, None, :] - buildings[None, :, :])
    grad_states[:, -1] += np.sum(weights[..., None] * units, axis=1)
    coincidences += int(np.count_nonzero(zero & (weights != 0.0)))

    # restricted airspace: active hinges push away from the zone
    if len(zones) > 0:
        units, norms, zero = _unit_vectors(states[:, 1:, None, :] - zones[None, None, :, :])
        active = (norms < d_min) & ~zero
        grad_states[:, 1:] -= np.sum(units * active[..., None], axis=2)
        coincidences += int(np.count_nonzero(zero & (d_min > 0.0)))

    grad_controls = np.zeros_like(controls)
    grad_controls[:, 1:] = 2.0 * lambda_ctrl * controls[:, 1:]
    return CostGradient(grad_states, grad_controls, coincidences)


def restricted_violations_from_arrays(states, zones, d_min):
    """ (drone, t, zone, distance) for every state at t >= 1 closer than d_min to a zone. """
    if len(zones) == 0:
        return []
    diff = states[:, 1:, None, :] - zones[None, None, :, :]
    distances = np.sqrt(np.sum(diff * diff, axis=-1))
    return [(int(i), int(t) + 1, int(k), float(distances[i, t, k]))
            for i, t, k in zip(*np.nonzero(distances < d_min))]


def _scenario_arrays(scenario, trajectories, assignment):
    states = stack_states(trajectories)
    controls = stack_controls(trajectories)
    weights = delivery_weights(scenario.building_costs, len(trajectories), assignment)
    return states, controls, weights


def delivery_cost(trajectories, buildings, assignment=None):
    """ Cost-weighted distance from each drone's final state to the buildings.

    J_delivery = sum_i sum_j c_j * ||x_i(N) - b_j||, restricted to the pairs of
    `assignment` when one is given.

    Parameters
    ----------
    trajectories : list of DroneTrajectory
    buildings : list of Building
    assignment : dict (optional)
        building index -> drone index.

    Returns
    -------
    float
    """
    positions = np.array([b.position for b in buildings], dtype=float).reshape(-1, 2)
    costs = np.array([b.cost for b in buildings], dtype=float)
    weights = delivery_weights(costs, len(trajectories), assignment)
    return delivery_cost_from_arrays(stack_states(trajectories), positions, weights)


def restricted_cost(trajectories, zones, d_min):
    """ Hinge penalty sum_i sum_{t=1..N} sum_k max(d_min - ||x_i(t) - r_k||, 0). """
    if d_min < 0:
        raise ValueError(f'd_min must be non-negative, got {d_min}')
    positions = np.array([z.position for z in zones], dtype=float).reshape(-1, 2)
    return restricted_cost_from_arrays(stack_states(trajectories), positions, d_min)


def control_penalty(trajectories, lambda_ctrl):
    """ lambda * sum_i sum_{t=1..N-1} ||u_i(t)||^2. """
    if lambda_ctrl < 0:
        raise ValueError(f'lambda_ctrl must be non-negative, got {lambda_ctrl}')
    return control_penalty_from_arrays(stack_controls(trajectories), lambda_ctrl)


def total_cost(scenario, trajectories, lambda_ctrl, assignment=None):
    """ CostBreakdown of the trajectories in the scenario. """
    states, controls, weights = _scenario_arrays(scenario, trajectories, assignment)
    return total_cost_from_arrays(states, controls, scenario.building_positions, weights,
                                  scenario.zone_positions, scenario.d_min, lambda_ctrl)


def grad_total_cost(scenario, trajectories, lambda_ctrl, assignment=None):
    """ Analytic partial derivatives of J with respect to every state and control.

    States and controls are treated as independent variables. Norms evaluated at distance
    0 (a state exactly on a building or a zone) contribute the zero subgradient and are
    counted in `CostGradient.coincidences`. Hinges at exactly d_min are inactive.

    Returns
    -------
    CostGradient
    """
    states, controls, weights = _scenario_arrays(scenario, trajectories, assignment)
    grad = gradient_from_arrays(states, controls, scenario.building_positions, weights,
                                scenario.zone_positions, scenario.d_min, lambda_ctrl)
    if grad.coincidences:
        logger.warning('%d cost term(s) evaluated at distance 0; zero subgradient used',
                       grad.coincidences)
    return grad


def restricted_violations(scenario, trajectories):
    return restricted_violations_from_arrays(stack_states(trajectories), scenario.zone_positions,
                                             scenario.d_min)
