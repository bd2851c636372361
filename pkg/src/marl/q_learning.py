import logging
from dataclasses import dataclass
from typing import Any, Hashable, List

import numpy as np

from src.utils.enumerators import Method

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    """Tabular learning settings.

    Attributes:
        episodes (int): training episodes
        alpha (float): learning rate, 0 < alpha <= 1
        gamma (float): discount, 0 <= gamma < 1
        epsilon_start, epsilon_end (float): exploration rate, decayed linearly over episodes
        seed (int): seed of the exploration generator
        record_transitions (bool): keep every learning transition in the training result
    """
    episodes: int = 1000
    alpha: float = 0.1
    gamma: float = 0.95
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    seed: int = 0
    record_transitions: bool = False

    def __post_init__(self):
        if int(self.episodes) < 0:
            raise ValueError(f'episodes must be non-negative, got {self.episodes}')
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f'alpha must be in (0, 1], got {self.alpha}')
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f'gamma must be in [0, 1), got {self.gamma}')
        for name in ('epsilon_start', 'epsilon_end'):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f'{name} must be in [0, 1], got {value}')
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f'seed must be a 64-bit unsigned integer, got {self.seed}')

    def epsilon(self, episode):
        """Exploration rate of episode `episode` (0-based)."""
        if self.episodes <= 1:
            return self.epsilon_start
        fraction = episode / (self.episodes - 1)
        return self.epsilon_start + (self.epsilon_end - self.epsilon_start) * fraction


class QTable(object):
    """Sparse action-value table.

    Values are stored per state as one row over all actions; a state never written returns
    `default_value` for every action and looking it up does not create it.
    """
    def __init__(self, n_actions, default_value=0.0):
        if n_actions < 1:
            raise ValueError(f'n_actions must be positive, got {n_actions}')
        self.n_actions = int(n_actions)
        self.default_value = float(default_value)
        self._rows = {}

    def __len__(self):
        return len(self._rows)

    def __contains__(self, state):
        return state in self._rows

    def states(self):
        return list(self._rows)

    def row(self, state):
        """Copy of the action values of `state`."""
        values = self._rows.get(state)
        if values is None:
            return np.full(self.n_actions, self.default_value)
        return values.copy()

    def value(self, state, action):
        values = self._rows.get(state)
        if values is None:
            return self.default_value
        return float(values[int(action)])

    def set(self, state, action, value):
        values = self._rows.get(state)
        if values is None:
            values = np.full(self.n_actions, self.default_value)
            self._rows[state] = values
        values[int(action)] = value

    def max_value(self, state):
        values = self._rows.get(state)
        if values is None:
            return self.default_value
        return float(values.max())

    def greedy(self, state):
        """Highest-valued action; ties go to the lowest action index."""
        values = self._rows.get(state)
        if values is None:
            return 0
        return int(np.argmax(values))

    def __eq__(self, other):
        if not isinstance(other, QTable):
            return False
        if self.n_actions != other.n_actions or self.default_value != other.default_value:
            return False
        if self._rows.keys() != other._rows.keys():
            return False
        return all(np.array_equal(v, other._rows[k]) for k, v in self._rows.items())

    def __repr__(self):
        return f'QTable(n_actions={self.n_actions}, states={len(self)})'


class AdditiveQ(object):
    """Joint action value of value decomposition: Q(s, a) = sum_i Q_i(s_i, a_i).

    Joint states and joint actions are tuples with one entry per agent. With `log=True`
    every joint lookup is recorded as (joint value, per-agent values).
    """
    def __init__(self, tables: List[QTable], log=False):
        self.tables = list(tables)
        self.log = log
        self.lookups = []

    def value(self, joint_state, joint_action):
        parts = [table.value(s, a) for table, s, a in zip(self.tables, joint_state, joint_action)]
        total = float(sum(parts))
        if self.log:
            self.lookups.append((total, parts))
        return total

    def max_value(self, joint_state):
        parts = [table.max_value(s) for table, s in zip(self.tables, joint_state)]
        total = float(sum(parts))
        if self.log:
            self.lookups.append((total, parts))
        return total


@dataclass(frozen=True)
class Transition:
    state: Hashable
    action: Any
    reward: float
    next_state: Hashable
    terminal: bool = False


def q_update(q, r, max_next, alpha, gamma):
    """ One temporal-difference update.

    Returns q + alpha * (r + gamma * max_next - q). A value already equal to its target
    comes back unchanged.
    """
    return q + alpha * (r + gamma * max_next - q)


def td_target(reward, max_next, gamma, terminal):
    return reward if terminal else reward + gamma * max_next


def td_loss(transitions, q_lookup, gamma, mode=Method.IQL):
    """ Mean squared temporal-difference error over a batch of transitions.

    Parameters
    ----------
    transitions : list of Transition
        Terminal transitions do not bootstrap.
    q_lookup : QTable, AdditiveQ or list of QTable
        Value lookup. In vdn mode a list of per-agent tables is summed (AdditiveQ); states
        and actions of the transitions are then per-agent tuples.
    gamma : float
    mode : Method
        iql, jal or vdn.

    Returns
    -------
    float
        0.0 for an empty batch.
    """
    mode = Method(mode)
    if mode == Method.MPC:
        raise ValueError('td_loss applies to the learning methods only')
    if mode == Method.VDN and not isinstance(q_lookup, AdditiveQ):
        q_lookup = AdditiveQ(q_lookup)
    if len(transitions) == 0:
        return 0.0
    errors = []
    for tr in transitions:
        max_next = 0.0 if tr.terminal else q_lookup.max_value(tr.next_state)
        target = td_target(tr.reward, max_next, gamma, tr.terminal)
        errors.append(target - q_lookup.value(tr.state, tr.action))
    errors = np.asarray(errors)
    return float(np.mean(errors * errors))
