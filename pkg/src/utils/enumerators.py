from enum import Enum


class BuildingKind(Enum):
    """
    Class representing the type of a delivery building. The kind is metadata only: every
    cost computation reads the numeric cost of the building.
    """
    HOME = 'home'
    OFFICE = 'office'
    SHOP = 'shop'
    CUSTOM = 'custom'


class Method(Enum):
    """
    Class representing the planning method compared in a benchmark.
    """
    MPC = 'mpc'
    IQL = 'iql'
    JAL = 'jal'
    VDN = 'vdn'

    @property
    def is_marl(self):
        return self is not Method.MPC


class Action(Enum):
    """
    Class representing the discrete moves of a drone in the grid world. The value is the
    action index used by the Q-tables; ties between actions are broken toward the lowest index.
    """
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3
    STAY = 4

    @property
    def delta(self):
        return _ACTION_DELTAS[self]


# (dcol, drow); row grows with the y coordinate
_ACTION_DELTAS = {
    Action.UP: (0, 1),
    Action.DOWN: (0, -1),
    Action.LEFT: (-1, 0),
    Action.RIGHT: (1, 0),
    Action.STAY: (0, 0),
}


class AssignmentMode(Enum):
    """
    Class representing how buildings are split between the learning agents.

        NEAREST: every building belongs to the drone whose start is closest.
        SHARED: any agent may deliver any building.
    """
    NEAREST = 'nearest'
    SHARED = 'shared'


class ReportFormat(Enum):
    TEXT = 'text'
    CSV = 'csv'


class EvaluatorType(Enum):
    """
    Class representing the per-drone delivery cost used by the fleet selection.
    """
    FLAT = 'flat'
    START_DISTANCE = 'start-distance'
    FINAL_STATE = 'final-state'
