"""Grid-world delivery MDP derived from a scenario.

Grid dynamics
-------------
- Cells are (col, row) with 0 <= col < width and 0 <= row < height; a scenario position
  (x, y) maps to the cell (round(x), round(y)), halves rounded up.
- Actions: up (row + 1), down (row - 1), left, right, stay. Moves off the grid are no-ops.
- Agents move simultaneously; their moves are resolved in agent order.
- Every step costs `step_penalty`; ending a step on a restricted cell costs `zone_penalty`;
  ending a step on an undelivered building the agent is allowed to deliver pays
  `delivery_reward_scale * c_j` once and marks the building delivered.
- An agent whose buildings are all delivered is finished: it no longer moves nor pays.
- The episode ends when every building is delivered (terminal) or after `max_steps`
  (truncated).
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Tuple

from src.utils.enumerators import Action, AssignmentMode
from src.utils.errors import DiscretizationError, ScenarioError
from src.utils.general_utils import to_cell
from src.utils.validations import validate

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]
ACTIONS = tuple(Action)
N_ACTIONS = len(ACTIONS)


@dataclass
class MarlEnvConfig:
    """Reward shaping and task split of the grid world.

    Attributes:
        step_penalty (float): paid by every active agent at every step
        zone_penalty (float): paid for every step ending on a restricted cell
        delivery_reward_scale (float): delivering building j pays scale * c_j
        max_steps (int): episode length cap
        assignment_mode (AssignmentMode): nearest-start split or shared task
        jal_action_budget (int): largest joint-action count a JAL table may use
    """
    step_penalty: float = 0.1
    zone_penalty: float = 5.0
    delivery_reward_scale: float = 10.0
    max_steps: int = 200
    assignment_mode: AssignmentMode = AssignmentMode.NEAREST
    jal_action_budget: int = 1024

    def __post_init__(self):
        self.assignment_mode = AssignmentMode(self.assignment_mode)
        if self.step_penalty < 0:
            raise ValueError(f'step_penalty must be non-negative, got {self.step_penalty}')
        if self.zone_penalty < 0:
            raise ValueError(f'zone_penalty must be non-negative, got {self.zone_penalty}')
        if int(self.max_steps) < 1:
            raise ValueError(f'max_steps must be positive, got {self.max_steps}')
        if int(self.jal_action_budget) < 1:
            raise ValueError(f'jal_action_budget must be positive, got {self.jal_action_budget}')


@dataclass(frozen=True)
class AgentState:
    """What an independent learner observes: its cell and which of its own buildings are
    already delivered (bit b is the b-th assigned building, in building order)."""
    cell: Cell
    delivered_mask: int
    n_assigned: int


@dataclass(frozen=True)
class EnvState:
    cells: Tuple[Cell, ...]
    delivered: int
    steps: int = 0


@dataclass
class StepResult:
    state: EnvState
    rewards: Tuple[float, ...]
    done: bool
    terminal: bool
    acted: Tuple[bool, ...]
    zone_entries: int = 0
    deliveries: Tuple[Tuple[int, int], ...] = ()


@dataclass
class GridMDP:
    """Discretised delivery task.

    Attributes:
        width, height (int): grid size in cells
        building_cells (tuple): cell of every building, in building order
        building_costs (tuple): cost c_j of every building
        zone_cells (frozenset): restricted cells
        starts (tuple): start cell of every agent
        assigned (tuple): per agent, the building indices it may deliver
        step_penalty, zone_penalty, delivery_reward_scale (float), max_steps (int): see
            MarlEnvConfig
    """
    width: int
    height: int
    building_cells: Tuple[Cell, ...]
    building_costs: Tuple[float, ...]
    zone_cells: FrozenSet[Cell]
    starts: Tuple[Cell, ...]
    assigned: Tuple[Tuple[int, ...], ...]
    step_penalty: float = 0.1
    zone_penalty: float = 5.0
    delivery_reward_scale: float = 10.0
    max_steps: int = 200
    _building_at: Dict[Cell, int] = field(default=None, init=False, repr=False, compare=False)
    _bits: Tuple[int, ...] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self._building_at = {cell: j for j, cell in enumerate(self.building_cells)}
        self._bits = tuple(sum(1 << j for j in buildings) for buildings in self.assigned)
        for cell in list(self.building_cells) + list(self.zone_cells) + list(self.starts):
            if not self.in_bounds(cell):
                raise ScenarioError(f'cell {cell} is outside the {self.width}x{self.height} grid')

    @property
    def n_agents(self):
        return len(self.starts)

    @property
    def n_buildings(self):
        return len(self.building_cells)

    @property
    def required_mask(self):
        ret = 0
        for bits in self._bits:
            ret |= bits
        return ret

    def in_bounds(self, cell):
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def move(self, cell, action):
        dcol, drow = action.delta
        target = (cell[0] + dcol, cell[1] + drow)
        return target if self.in_bounds(target) else cell

    def reset(self):
        return EnvState(cells=tuple(self.starts), delivered=0, steps=0)

    def agent_bits(self, agent):
        return self._bits[agent]

    def agent_finished(self, agent, delivered):
        bits = self._bits[agent]
        return delivered & bits == bits

    def agent_key(self, agent, state):
        """Hashable independent-learner state: (cell, delivered bits of the agent's buildings)."""
        return (state.cells[agent], state.delivered & self._bits[agent])

    def joint_key(self, state):
        return (state.cells, state.delivered)

    def agent_state(self, agent, state):
        local = 0
        for b, j in enumerate(self.assigned[agent]):
            if state.delivered >> j & 1:
                local |= 1 << b
        return AgentState(state.cells[agent], local, len(self.assigned[agent]))

    def is_terminal(self, state):
        return state.delivered & self.required_mask == self.required_mask

    def step(self, state, actions):
        """Apply one action per agent (finished agents ignore theirs).

        Args:
            state (EnvState): current state
            actions (sequence of Action): one action per agent

        Returns:
            StepResult
        """
        cells = list(state.cells)
        delivered = state.delivered
        rewards = [0.0] * self.n_agents
        acted = tuple(not self.agent_finished(i, delivered) for i in range(self.n_agents))
        zone_entries = 0
        deliveries = []
        for i in range(self.n_agents):
            if not acted[i]:
                continue
            cell = self.move(cells[i], actions[i])
            cells[i] = cell
            reward = -self.step_penalty
            if cell in self.zone_cells:
                reward -= self.zone_penalty
                zone_entries += 1
            j = self._building_at.get(cell)
            if j is not None and not delivered >> j & 1 and self._bits[i] >> j & 1:
                reward += self.delivery_reward_scale * self.building_costs[j]
                delivered |= 1 << j
                deliveries.append((j, i))
            rewards[i] = reward
        next_state = EnvState(tuple(cells), delivered, state.steps + 1)
        terminal = self.is_terminal(next_state)
        done = terminal or next_state.steps >= self.max_steps
        return StepResult(next_state, tuple(rewards), done, terminal, acted, zone_entries,
                          tuple(deliveries))

    def return_bounds(self):
        """Interval containing every episode return summed over the agents."""
        low = -self.n_agents * self.max_steps * (self.step_penalty + self.zone_penalty)
        high = self.delivery_reward_scale * sum(self.building_costs)
        return low, high


def discretize(scenario, assignment=None, config=None):
    """ Grid-world MDP of a scenario.

    Parameters
    ----------
    scenario : Scenario
        A valid scenario.
    assignment : dict (optional)
        building index -> drone index. Without it every agent may deliver every building
        (shared task).
    config : MarlEnvConfig (optional)

    Returns
    -------
    GridMDP
        Grid of size (max x + 1) x (max y + 1) over buildings, zones and starts.
    """
    config = config or MarlEnvConfig()
    violations = validate(scenario)
    if violations:
        raise ScenarioError(f'cannot discretize an invalid scenario: {"; ".join(violations)}')
    building_cells = tuple(to_cell(b.position) for b in scenario.buildings)
    seen = {}
    for j, cell in enumerate(building_cells):
        if cell in seen:
            k = seen[cell]
            raise DiscretizationError(
                f'buildings[{k}] {scenario.buildings[k]} and buildings[{j}] '
                f'{scenario.buildings[j]} both round to cell {cell}')
        seen[cell] = j
    zone_cells = frozenset(to_cell(z.position) for z in scenario.zones)
    starts = tuple(to_cell(p) for p in scenario.drone_starts)
    all_cells = list(building_cells) + list(zone_cells) + list(starts)
    for cell in all_cells:
        if cell[0] < 0 or cell[1] < 0:
            raise ScenarioError(f'cell {cell} has a negative coordinate; the grid starts at 0')
    width = max(c[0] for c in all_cells) + 1
    height = max(c[1] for c in all_cells) + 1

    if assignment is None:
        assigned = tuple(tuple(range(scenario.n_buildings)) for _ in starts)
    else:
        missing = [j for j in range(scenario.n_buildings) if j not in assignment]
        if missing:
            raise ValueError(f'assignment misses buildings {missing}')
        assigned = tuple(
            tuple(j for j in range(scenario.n_buildings) if assignment[j] == i)
            for i in range(len(starts)))
    mdp = GridMDP(width=width,
                  height=height,
                  building_cells=building_cells,
                  building_costs=tuple(b.cost for b in scenario.buildings),
                  zone_cells=zone_cells,
                  starts=starts,
                  assigned=assigned,
                  step_penalty=config.step_penalty,
                  zone_penalty=config.zone_penalty,
                  delivery_reward_scale=config.delivery_reward_scale,
                  max_steps=int(config.max_steps))
    logger.debug('discretized %s into a %dx%d grid (%d buildings, %d zones, %d agents)',
                 scenario.name, width, height, len(building_cells), len(zone_cells),
                 len(starts))
    return mdp
