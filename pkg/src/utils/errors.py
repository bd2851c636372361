class DroneDeliveryError(Exception):
    """ Base class of every error raised by the package. """


class ScenarioError(DroneDeliveryError, ValueError):
    """ A scenario is malformed or violates its invariants. """


class ScenarioParseError(ScenarioError):
    """ A scenario document could not be parsed.

    Parameters
    ----------
    message : str
        Human readable description.
    line : int (optional)
        Line of the document where the problem was found.
    field : str (optional)
        Dotted path of the offending field (e.g. 'buildings[3].cost').
    """
    def __init__(self, message, line=None, field=None):
        location = []
        if line is not None:
            location.append(f'line {line}')
        if field is not None:
            location.append(f'field {field}')
        prefix = f'{", ".join(location)}: ' if location else ''
        super().__init__(f'{prefix}{message}')
        self.line = line
        self.field = field


class UnknownScenarioError(ScenarioError, KeyError):
    def __init__(self, scenario_id, valid_ids):
        super().__init__(
            f'unknown scenario id {scenario_id!r}; valid ids are {", ".join(valid_ids)}')
        self.scenario_id = scenario_id
        self.valid_ids = tuple(valid_ids)

    def __str__(self):
        return self.args[0]


class DiscretizationError(ScenarioError):
    """ Two buildings share a grid cell after rounding. """


class OptimizationDivergedError(DroneDeliveryError, RuntimeError):
    def __init__(self, iteration, last_finite_cost):
        super().__init__(f'total cost became non-finite at iteration {iteration} '
                         f'(last finite J={last_finite_cost!r}); lower the learning rate')
        self.iteration = iteration
        self.last_finite_cost = last_finite_cost


class TableBudgetError(DroneDeliveryError, RuntimeError):
    def __init__(self, n_agents, n_actions, budget):
        joint = n_actions**n_agents
        super().__init__(f'joint action table needs {n_actions}^{n_agents} = {joint} joint '
                         f'actions per state, above the budget of {budget}; the joint table grows '
                         'exponentially with the number of agents')
        self.joint_actions = joint
        self.budget = budget


class MethodRunError(DroneDeliveryError, RuntimeError):
    def __init__(self, method, cause):
        super().__init__(f'[{method}] {cause}')
        self.method = method
        self.cause = cause
