import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from src.mpc.costs import (CostBreakdown, delivery_weights, gradient_from_arrays,
                           restricted_violations_from_arrays, total_cost_from_arrays)
from src.mpc.dynamics import rollout_states
from src.trajectory import DroneTrajectory
from src.utils.errors import OptimizationDivergedError, ScenarioError
from src.utils.validations import validate

logger = logging.getLogger(__name__)

# slack allowed when two totals are compared for a rise
DESCENT_TOLERANCE = 1e-9


@dataclass
class OptimizerConfig:
    """Settings of the gradient-descent loop.

    Attributes:
        learning_rate (float): step size alpha, 0 <= alpha <= 1
        max_iterations (int): iteration cap
        convergence_epsilon (float): stop once |J_t - J_{t-1}| < epsilon
        lambda_ctrl (float): control penalty weight; None uses the scenario lambda
        seed (int): seed of the control initialisation noise
        init_noise (float): controls start uniform in [-init_noise, init_noise]
        step_decay (float): fixed-step mode only; alpha is multiplied by it whenever J rises
            right after a decrease (an oscillation across a kink). 1 keeps alpha fixed
        line_search (bool): every iteration starts from learning_rate and halves the step
            until J does not rise
        max_backtracks (int): halvings tried per iteration when line_search is on
        log_every (int): iterations between two debug log lines
    """
    learning_rate: float = 1e-3
    max_iterations: int = 20000
    convergence_epsilon: float = 1e-6
    lambda_ctrl: Optional[float] = None
    seed: int = 0
    init_noise: float = 0.01
    step_decay: float = 0.5
    line_search: bool = False
    max_backtracks: int = 40
    log_every: int = 500

    def __post_init__(self):
        if not 0.0 <= self.learning_rate <= 1.0:
            raise ValueError(f'learning_rate must be in [0, 1], got {self.learning_rate}')
        if int(self.max_iterations) < 1:
            raise ValueError(f'max_iterations must be positive, got {self.max_iterations}')
        if self.convergence_epsilon < 0:
            raise ValueError(
                f'convergence_epsilon must be non-negative, got {self.convergence_epsilon}')
        if self.lambda_ctrl is not None and self.lambda_ctrl < 0:
            raise ValueError(f'lambda_ctrl must be non-negative, got {self.lambda_ctrl}')
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f'seed must be a 64-bit unsigned integer, got {self.seed}')
        if self.init_noise < 0:
            raise ValueError(f'init_noise must be non-negative, got {self.init_noise}')
        if not 0.0 < self.step_decay <= 1.0:
            raise ValueError(f'step_decay must be in (0, 1], got {self.step_decay}')
        if int(self.max_backtracks) < 0:
            raise ValueError(f'max_backtracks must be non-negative, got {self.max_backtracks}')

    def resolve_lambda(self, scenario):
        return scenario.lambda_ if self.lambda_ctrl is None else float(self.lambda_ctrl)


@dataclass
class OptimizationResult:
    """Outcome of `optimize`.

    Attributes:
        trajectories (list): one DroneTrajectory per drone, rolled out from the final controls
        cost_history (list): CostBreakdown of the initial iterate and of every accepted step
        iterations_used (int): iterations run
        converged (bool): the last accepted step changed J by less than epsilon
        learning_rate (float): step size of the last accepted step
        coincidence_events (int): zero subgradients used at exact coincidences
        violations (list): (drone, t, zone, distance) closer than d_min at the final iterate
        pre_rollout_states (ndarray): explicit state step x - alpha * dJ/dx of the last
            accepted iteration, before the rollout replaced it; None if no step was taken
        stalled (bool): line search found no step that keeps J from rising
    """
    trajectories: List[DroneTrajectory]
    cost_history: List[CostBreakdown]
    iterations_used: int
    converged: bool
    learning_rate: float
    coincidence_events: int = 0
    violations: list = field(default_factory=list)
    pre_rollout_states: Optional[np.ndarray] = None
    stalled: bool = False

    @property
    def final_cost(self) -> CostBreakdown:
        return self.cost_history[-1]

    @property
    def final_states(self):
        return np.stack([traj.final_state for traj in self.trajectories])

    @property
    def rollout_gap(self):
        """Largest distance between the explicit state step and the rolled-out states."""
        if self.pre_rollout_states is None:
            return 0.0
        states = np.stack([traj.states for traj in self.trajectories])
        return float(np.max(np.linalg.norm(self.pre_rollout_states - states, axis=-1)))


def initial_controls(n_drones, horizon, config):
    rng = np.random.default_rng(int(config.seed))
    if config.init_noise == 0:
        return np.zeros((n_drones, horizon, 2))
    return rng.uniform(-config.init_noise, config.init_noise, size=(n_drones, horizon, 2))


def reduced_control_gradient(A, B, grad):
    """Total derivative of J with respect to the controls.

    States follow from the controls through x(t+1) = A^T x(t) + B^T u(t), so the state
    partials reach the controls through the adjoint recursion
    p(N) = dJ/dx(N), p(t) = dJ/dx(t) + A p(t+1) and dJ/du(t) = du(t) + B p(t+1).
    """
    horizon = grad.controls.shape[1]
    reduced = grad.controls.copy()
    adjoint = grad.states[:, horizon].copy()
    for t in range(horizon - 1, -1, -1):
        # row vectors: (B p)^T == p^T B^T
        reduced[:, t] += adjoint @ B.T
        adjoint = grad.states[:, t] + adjoint @ A.T
    return reduced


def optimize(scenario, config=None, assignment=None):
    """ Gradient-descent MPC over the whole horizon.

    Every iteration computes the three cost terms and their gradients, takes the explicit
    step on the states (kept as the pre-rollout iterate) and on the controls with rate alpha
    using the gradient of J (state partials included through the dynamics), re-rolls the
    states from each drone's start so that the dynamics hold exactly, and records the new
    CostBreakdown. The loop stops when |delta J| < epsilon or after max_iterations.

    In fixed-step mode alpha shrinks by step_decay each time J rises right after a decrease,
    which settles the iterate on a kink of the delivery cost. With line_search every
    iteration starts from learning_rate and halves the step until J does not rise; when no
    such step exists the loop stops and reports `stalled`.

    Parameters
    ----------
    scenario : Scenario
        A valid scenario.
    config : OptimizerConfig (optional)
    assignment : dict (optional)
        building index -> drone index; restricts the delivery term to assigned pairs.

    Returns
    -------
    OptimizationResult

    Raises
    ------
    OptimizationDivergedError
        The total cost became non-finite (learning rate too large).
    """
    config = config or OptimizerConfig()
    violations = validate(scenario)
    if violations:
        raise ScenarioError(f'cannot optimize an invalid scenario: {"; ".join(violations)}')
    lambda_ctrl = config.resolve_lambda(scenario)
    A, B = scenario.A_matrix, scenario.B_matrix
    starts = scenario.starts
    buildings = scenario.building_positions
    zones = scenario.zone_positions
    weights = delivery_weights(scenario.building_costs, scenario.n_drones, assignment)

    def evaluate(controls):
        states = rollout_states(A, B, starts, controls)
        return states, total_cost_from_arrays(states, controls, buildings, weights, zones,
                                              scenario.d_min, lambda_ctrl)

    base_alpha = alpha = used_alpha = float(config.learning_rate)
    controls = initial_controls(scenario.n_drones, scenario.horizon, config)
    with np.errstate(over='ignore', invalid='ignore'):
        states, cost = evaluate(controls)
    if not cost.is_finite():
        raise OptimizationDivergedError(0, None)
    history = [cost]
    pre_rollout = None
    coincidences = 0
    converged = stalled = falling = False
    iteration = 0
    logger.info('optimizing %s: n=%d N=%d alpha=%g lambda_ctrl=%g', scenario.name,
                scenario.n_drones, scenario.horizon, alpha, lambda_ctrl)

    with np.errstate(over='ignore', invalid='ignore'):
        for iteration in range(1, int(config.max_iterations) + 1):
            grad = gradient_from_arrays(states, controls, buildings, weights, zones,
                                        scenario.d_min, lambda_ctrl)
            coincidences += grad.coincidences
            direction = reduced_control_gradient(A, B, grad)
            step = base_alpha if config.line_search else alpha
            new_controls = controls - step * direction
            new_states, new_cost = evaluate(new_controls)
            if config.line_search:
                backtracks = 0
                while (backtracks < config.max_backtracks
                       and not new_cost.total <= cost.total + DESCENT_TOLERANCE):
                    step /= 2.0
                    backtracks += 1
                    new_controls = controls - step * direction
                    new_states, new_cost = evaluate(new_controls)
                if not new_cost.total <= cost.total + DESCENT_TOLERANCE:
                    stalled = True
                    logger.info('iteration %d: no step down to alpha=%g keeps J from rising',
                                iteration, step)
                    break
            if not new_cost.is_finite():
                raise OptimizationDivergedError(iteration, cost.total)
            change = new_cost.total - cost.total
            if not config.line_search:
                if falling and change > DESCENT_TOLERANCE:
                    alpha *= config.step_decay
                falling = change < 0
            used_alpha = step
            pre_rollout = states - step * grad.states
            controls, states, cost = new_controls, new_states, new_cost
            history.append(cost)
            if config.log_every and iteration % config.log_every == 0:
                logger.debug('iteration %d: J=%.6f (delivery %.6f, restricted %.6f, '
                             'penalty %.6f) alpha=%g', iteration, cost.total, cost.delivery,
                             cost.restricted, cost.penalty, step)
            if abs(change) < config.convergence_epsilon:
                converged = True
                break

    if coincidences:
        logger.warning('%d zero subgradient(s) used at exact coincidences', coincidences)
    final_violations = restricted_violations_from_arrays(states, zones, scenario.d_min)
    if final_violations:
        logger.warning('%d state(s) closer than d_min=%g to a restricted zone',
                       len(final_violations), scenario.d_min)
    outcome = 'converged' if converged else 'stalled' if stalled else 'stopped'
    logger.info('%s after %d iteration(s): J=%.6f', outcome, iteration, cost.total)
    trajectories = [DroneTrajectory(states[i], controls[i]) for i in range(scenario.n_drones)]
    return OptimizationResult(trajectories=trajectories,
                              cost_history=history,
                              iterations_used=iteration,
                              converged=converged,
                              learning_rate=used_alpha,
                              coincidence_events=coincidences,
                              violations=final_violations,
                              pre_rollout_states=pre_rollout,
                              stalled=stalled)
