import logging
from dataclasses import dataclass
from typing import Dict, Hashable

import numpy as np

from src.marl.grid_mdp import ACTIONS, N_ACTIONS, EnvState

logger = logging.getLogger(__name__)

# relative slack under which two action values count as tied
TIE_TOLERANCE = 1e-9


@dataclass
class ValueIterationResult:
    """Optimal values of a single-agent GridMDP, keyed like the iql table of agent 0."""
    values: Dict[Hashable, float]
    q_values: Dict[Hashable, np.ndarray]
    gamma: float
    sweeps: int

    def optimal_actions(self, state, tolerance=TIE_TOLERANCE):
        row = self.q_values[state]
        best = float(row.max())
        slack = tolerance * max(1.0, abs(best))
        return {a for a in range(len(row)) if row[a] >= best - slack}

    def greedy(self, state):
        return int(np.argmax(self.q_values[state]))


def _submasks(bits):
    sub = bits
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & bits


def single_agent_states(mdp):
    """Every (cell, delivered mask) key of agent 0."""
    bits = mdp.agent_bits(0)
    return [((col, row), mask) for mask in sorted(_submasks(bits))
            for col in range(mdp.width) for row in range(mdp.height)]


def value_iteration(mdp, gamma, tolerance=1e-12, max_sweeps=100000):
    """ Optimal action values of a single-agent GridMDP with discount `gamma`.

    Terminal states (every assigned building delivered) are worth 0; the step cap of the MDP
    is ignored (infinite horizon).

    Parameters
    ----------
    mdp : GridMDP
        Exactly one agent.
    gamma : float
        Discount in [0, 1).
    tolerance : float
        Stop once no value moves by more than this in a sweep.

    Returns
    -------
    ValueIterationResult
    """
    if mdp.n_agents != 1:
        raise ValueError(f'value_iteration handles single-agent MDPs, got {mdp.n_agents} agents')
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f'gamma must be in [0, 1), got {gamma}')
    states = single_agent_states(mdp)
    transitions = {}
    for key in states:
        if mdp.agent_finished(0, key[1]):
            continue
        outcomes = []
        for action in ACTIONS:
            result = mdp.step(EnvState((key[0],), key[1], 0), [action])
            outcomes.append((result.rewards[0], mdp.agent_key(0, result.state),
                             result.terminal))
        transitions[key] = outcomes

    values = {key: 0.0 for key in states}
    q_values = {key: np.zeros(N_ACTIONS) for key in states}
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        change = 0.0
        for key, outcomes in transitions.items():
            row = q_values[key]
            for a, (reward, next_key, terminal) in enumerate(outcomes):
                row[a] = reward if terminal else reward + gamma * values[next_key]
            best = float(row.max())
            change = max(change, abs(best - values[key]))
            values[key] = best
        if change <= tolerance:
            break
    logger.debug('value iteration: %d states, %d sweeps', len(states), sweeps)
    return ValueIterationResult(values, q_values, gamma, sweeps)
