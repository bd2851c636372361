"""Tabular multi-agent learners on a GridMDP.

- iql: one table per agent over (cell, own delivered mask); each agent learns from its own
  reward.
- jal: one table over the joint state and every joint action, learning from the team reward
  (sum of the agent rewards). The joint action space grows as 5^n and is refused past the
  configured budget.
- vdn: one table per agent; the team value is the sum of the agent values and every agent
  moves its own entry by alpha times the shared team TD error.

Terminal transitions (everything the learner must deliver is delivered) do not bootstrap;
transitions cut by max_steps do.
"""
import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.marl.grid_mdp import ACTIONS, N_ACTIONS
from src.marl.q_learning import (AdditiveQ, QTable, TrainConfig, Transition, q_update,
                                  td_target)
from src.utils.enumerators import Action, Method
from src.utils.errors import TableBudgetError

logger = logging.getLogger(__name__)

DEFAULT_JAL_BUDGET = 1024
LOG_EVERY = 100


@dataclass
class TrainingHistory:
    """Per-episode learning curve."""
    returns: List[float] = field(default_factory=list)
    td_losses: List[float] = field(default_factory=list)
    epsilons: List[float] = field(default_factory=list)

    def __len__(self):
        return len(self.returns)


@dataclass
class TrainResult:
    """Learned tables of one method.

    Attributes:
        method (Method): learner used
        tables (list): one QTable per agent (iql, vdn) or a single joint table (jal)
        history (TrainingHistory): learning curve
        transitions (list): with record_transitions, one list of Transition per table
            (iql) or a single list of joint transitions (jal, vdn)
        lookups (list): vdn with log_lookups, every (joint value, per-agent values) used
    """
    method: Method
    tables: List[QTable]
    history: TrainingHistory
    transitions: List[List[Transition]] = field(default_factory=list)
    lookups: list = field(default_factory=list)


@dataclass(frozen=True)
class PathStep:
    step: int
    cell: Tuple[int, int]
    action: Optional[Action]
    reward: float


@dataclass
class Rollout:
    """Greedy episode of learned tables.

    Attributes:
        steps (list): per agent, the PathStep sequence starting with its start cell at step 0
        episode_return (float): sum of every reward collected
        delivered_by (dict): building index -> agent that delivered it
        zone_entries (int): steps that ended on a restricted cell
        agent_steps (int): steps taken summed over agents
        n_steps (int): environment steps
        terminal (bool): every building was delivered
    """
    steps: List[List[PathStep]]
    episode_return: float
    delivered_by: Dict[int, int]
    zone_entries: int
    agent_steps: int
    n_steps: int
    terminal: bool

    @property
    def delivered(self):
        return sorted(self.delivered_by)

    @property
    def paths(self):
        return [[s.cell for s in agent_steps] for agent_steps in self.steps]


def joint_actions(n_agents):
    """Every joint action in lexicographic order of the agent action indices."""
    return list(product(range(N_ACTIONS), repeat=n_agents))


def check_jal_budget(n_agents, budget=DEFAULT_JAL_BUDGET):
    if N_ACTIONS**n_agents > budget:
        raise TableBudgetError(n_agents, N_ACTIONS, budget)


def _explore(rng, epsilon, table, state):
    if rng.random() < epsilon:
        return int(rng.integers(table.n_actions))
    return table.greedy(state)


def _iql_episode(mdp, tables, config, epsilon, rng, log):
    state = mdp.reset()
    episode_return, errors = 0.0, []
    while not mdp.is_terminal(state):
        keys = [mdp.agent_key(i, state) for i in range(mdp.n_agents)]
        indices = [None if mdp.agent_finished(i, state.delivered)
                   else _explore(rng, epsilon, tables[i], keys[i]) for i in range(mdp.n_agents)]
        actions = [Action.STAY if a is None else ACTIONS[a] for a in indices]
        result = mdp.step(state, actions)
        for i, a in enumerate(indices):
            if a is None:
                continue
            next_key = mdp.agent_key(i, result.state)
            terminal = mdp.agent_finished(i, result.state.delivered)
            max_next = 0.0 if terminal else tables[i].max_value(next_key)
            q = tables[i].value(keys[i], a)
            errors.append(td_target(result.rewards[i], max_next, config.gamma, terminal) - q)
            tables[i].set(keys[i], a, q_update(q, result.rewards[i], max_next, config.alpha,
                                               0.0 if terminal else config.gamma))
            if log is not None:
                log[i].append(Transition(keys[i], a, result.rewards[i], next_key, terminal))
        episode_return += sum(result.rewards)
        state = result.state
        if result.done:
            break
    return episode_return, errors


def _jal_episode(mdp, tables, config, epsilon, rng, log, joint):
    table = tables[0]
    state = mdp.reset()
    episode_return, errors = 0.0, []
    while not mdp.is_terminal(state):
        key = mdp.joint_key(state)
        a = _explore(rng, epsilon, table, key)
        result = mdp.step(state, [ACTIONS[k] for k in joint[a]])
        reward = sum(result.rewards)
        next_key = mdp.joint_key(result.state)
        max_next = 0.0 if result.terminal else table.max_value(next_key)
        q = table.value(key, a)
        errors.append(td_target(reward, max_next, config.gamma, result.terminal) - q)
        table.set(key, a, q_update(q, reward, max_next, config.alpha,
                                   0.0 if result.terminal else config.gamma))
        if log is not None:
            log[0].append(Transition(key, a, reward, next_key, result.terminal))
        episode_return += reward
        state = result.state
        if result.done:
            break
    return episode_return, errors


def _vdn_episode(mdp, tables, config, epsilon, rng, log, joint):
    state = mdp.reset()
    episode_return, errors = 0.0, []
    n = mdp.n_agents
    while not mdp.is_terminal(state):
        keys = tuple(mdp.agent_key(i, state) for i in range(n))
        acting = [not mdp.agent_finished(i, state.delivered) for i in range(n)]
        indices = tuple(_explore(rng, epsilon, tables[i], keys[i]) if acting[i]
                        else Action.STAY.value for i in range(n))
        result = mdp.step(state, [ACTIONS[a] for a in indices])
        reward = sum(result.rewards)
        next_keys = tuple(mdp.agent_key(i, result.state) for i in range(n))
        max_next = 0.0 if result.terminal else joint.max_value(next_keys)
        joint_q = joint.value(keys, indices)
        delta = td_target(reward, max_next, config.gamma, result.terminal) - joint_q
        errors.append(delta)
        for i in range(n):
            if acting[i]:
                q = tables[i].value(keys[i], indices[i])
                tables[i].set(keys[i], indices[i], q + config.alpha * delta)
        if log is not None:
            log[0].append(Transition(keys, indices, reward, next_keys, result.terminal))
        episode_return += reward
        state = result.state
        if result.done:
            break
    return episode_return, errors


def train(mdp, method, config=None, jal_action_budget=DEFAULT_JAL_BUDGET, log_lookups=False):
    """ Train one tabular learner with epsilon-greedy exploration.

    Parameters
    ----------
    mdp : GridMDP
    method : Method
        iql, jal or vdn.
    config : TrainConfig (optional)
    jal_action_budget : int
        Largest joint-action count a jal table may use.
    log_lookups : bool
        vdn only: keep every joint lookup as (joint value, per-agent values) in
        TrainResult.lookups.

    Returns
    -------
    TrainResult

    Raises
    ------
    TableBudgetError
        jal with 5^n joint actions above the budget; raised before any training.
    """
    method = Method(method)
    if not method.is_marl:
        raise ValueError(f'{method.value} is not a learning method')
    config = config or TrainConfig()
    rng = np.random.default_rng(int(config.seed))
    if method == Method.JAL:
        check_jal_budget(mdp.n_agents, jal_action_budget)
        joint = joint_actions(mdp.n_agents)
        tables = [QTable(len(joint))]
    else:
        tables = [QTable(N_ACTIONS) for _ in range(mdp.n_agents)]
        joint = AdditiveQ(tables, log=log_lookups)
    log = [[] for _ in tables] if config.record_transitions else None
    if log is not None and method != Method.IQL:
        log = [[]]

    history = TrainingHistory()
    logger.info('training %s on a %dx%d grid: %d agent(s), %d episode(s)', method.value,
                mdp.width, mdp.height, mdp.n_agents, config.episodes)
    for episode in range(int(config.episodes)):
        epsilon = config.epsilon(episode)
        if method == Method.IQL:
            episode_return, errors = _iql_episode(mdp, tables, config, epsilon, rng, log)
        elif method == Method.JAL:
            episode_return, errors = _jal_episode(mdp, tables, config, epsilon, rng, log, joint)
        else:
            episode_return, errors = _vdn_episode(mdp, tables, config, epsilon, rng, log, joint)
        errors = np.asarray(errors, dtype=float)
        history.returns.append(float(episode_return))
        history.td_losses.append(float(np.mean(errors * errors)) if len(errors) else 0.0)
        history.epsilons.append(float(epsilon))
        if (episode + 1) % LOG_EVERY == 0:
            logger.debug('%s episode %d: return %.3f, td loss %.5f, epsilon %.3f', method.value,
                         episode + 1, history.returns[-1], history.td_losses[-1], epsilon)
    logger.info('%s done after %d episode(s): %d table entries', method.value, len(history),
                sum(len(t) for t in tables))
    lookups = joint.lookups if method == Method.VDN else []
    return TrainResult(method, tables, history, log or [], lookups)


def greedy_actions(mdp, result, state):
    """Greedy action of every agent (ties to the lowest action index)."""
    if result.method == Method.JAL:
        joint = joint_actions(mdp.n_agents)
        return [ACTIONS[k] for k in joint[result.tables[0].greedy(mdp.joint_key(state))]]
    return [ACTIONS[table.greedy(mdp.agent_key(i, state))]
            for i, table in enumerate(result.tables)]


def greedy_rollout(mdp, result):
    """ Run the greedy policy of `result` from the start until every building is delivered
    or max_steps is reached.

    Returns
    -------
    Rollout
    """
    state = mdp.reset()
    steps = [[PathStep(0, cell, None, 0.0)] for cell in state.cells]
    delivered_by = {}
    episode_return, zone_entries, agent_steps, n_steps = 0.0, 0, 0, 0
    terminal = mdp.is_terminal(state)
    while not terminal:
        actions = greedy_actions(mdp, result, state)
        outcome = mdp.step(state, actions)
        n_steps += 1
        for i, acted in enumerate(outcome.acted):
            if acted:
                agent_steps += 1
                steps[i].append(PathStep(n_steps, outcome.state.cells[i], actions[i],
                                         outcome.rewards[i]))
        delivered_by.update(outcome.deliveries)
        zone_entries += outcome.zone_entries
        episode_return += sum(outcome.rewards)
        state = outcome.state
        terminal = outcome.terminal
        if outcome.done:
            break
    return Rollout(steps, episode_return, delivered_by, zone_entries, agent_steps, n_steps,
                   terminal)


def rollout_cost(mdp, rollout):
    """ Cost of a greedy rollout on the scale of the MPC objective:
    delivered building costs, plus step and zone penalties paid, plus the scaled cost of every
    building left undelivered. """
    delivered = sum(mdp.building_costs[j] for j in rollout.delivered_by)
    missed = sum(c for j, c in enumerate(mdp.building_costs) if j not in rollout.delivered_by)
    return (delivered + mdp.step_penalty * rollout.agent_steps
            + mdp.zone_penalty * rollout.zone_entries + mdp.delivery_reward_scale * missed)
