import json
import logging
import math

import pandas as pd

from src.scenario import Building, RestrictedZone, Scenario
from src.utils.enumerators import BuildingKind
from src.utils.errors import ScenarioError, ScenarioParseError
from src.utils.read_files import File
from src.utils.validations import validate

logger = logging.getLogger(__name__)

# Order in which save_scenario writes the top-level keys
SCENARIO_KEYS = ('name', 'd_min', 'lambda', 'horizon', 'A', 'B', 'drone_starts', 'buildings',
                 'zones')
BUILDING_KEYS = ('x', 'y', 'kind', 'cost')

COST_HISTORY_COLUMNS = ['iteration', 'J_delivery', 'J_restricted', 'J_penalty', 'J_total']
TRAJECTORY_COLUMNS = ['drone', 't', 'x', 'y', 'u_x', 'u_y']
FLEET_PLAN_COLUMNS = ['drone', 'visit_order', 'building_x', 'building_y', 'kind', 'cost']
LEARNING_CURVE_COLUMNS = ['episode', 'return', 'td_loss', 'epsilon']
POLICY_PATH_COLUMNS = ['agent', 'step', 'col', 'row', 'action', 'reward']


def _reject_duplicates(pairs):
    ret = {}
    for key, value in pairs:
        if key in ret:
            raise ScenarioParseError(f'duplicated key {key!r}', field=key)
        ret[key] = value
    return ret


def _number(value, field):
    # bool is an int subclass but never a valid number here
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioParseError(f'expected a number, got {value!r}', field=field)
    return float(value)


def _integer(value, field):
    if isinstance(value, bool):
        raise ScenarioParseError(f'expected an integer, got {value!r}', field=field)
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if not isinstance(value, int):
        raise ScenarioParseError(f'expected an integer, got {value!r}', field=field)
    return value


def _pair(value, field):
    if not isinstance(value, list) or len(value) != 2:
        raise ScenarioParseError(f'expected [x, y], got {value!r}', field=field)
    return (_number(value[0], f'{field}[0]'), _number(value[1], f'{field}[1]'))


def _matrix(value, field):
    if not isinstance(value, list) or len(value) != 2:
        raise ScenarioParseError('expected a 2x2 array (row-major)', field=field)
    return tuple(_pair(row, f'{field}[{r}]') for r, row in enumerate(value))


def _list(value, field):
    if not isinstance(value, list):
        raise ScenarioParseError(f'expected an array, got {type(value).__name__}', field=field)
    return value


def _building(value, j):
    field = f'buildings[{j}]'
    if not isinstance(value, dict):
        raise ScenarioParseError('expected an object with x, y, kind, cost', field=field)
    unknown = sorted(set(value) - set(BUILDING_KEYS))
    if unknown:
        raise ScenarioParseError(f'unknown keys {", ".join(unknown)}', field=field)
    missing = [k for k in BUILDING_KEYS if k not in value]
    if missing:
        raise ScenarioParseError(f'missing keys {", ".join(missing)}', field=field)
    try:
        kind = BuildingKind(value['kind'])
    except ValueError:
        raise ScenarioParseError(
            f'kind must be one of {", ".join(k.value for k in BuildingKind)}, got '
            f'{value["kind"]!r}', field=f'{field}.kind') from None
    return Building(position=(_number(value['x'], f'{field}.x'),
                              _number(value['y'], f'{field}.y')),
                    kind=kind,
                    cost=_number(value['cost'], f'{field}.cost'))


def scenario_from_dict(data):
    """ Build a Scenario from the parsed json document, checking the schema.

    Parameters
    ----------
    data : dict
        Parsed document.

    Returns
    -------
    Scenario
        The scenario (not yet validated against its invariants).
    """
    if not isinstance(data, dict):
        raise ScenarioParseError('the document must be a json object')
    unknown = sorted(set(data) - set(SCENARIO_KEYS))
    if unknown:
        raise ScenarioParseError(f'unknown keys {", ".join(unknown)}', field=unknown[0])
    missing = [k for k in SCENARIO_KEYS if k not in data]
    if missing:
        raise ScenarioParseError(f'missing keys {", ".join(missing)}', field=missing[0])
    if not isinstance(data['name'], str):
        raise ScenarioParseError('expected a string', field='name')
    return Scenario(
        name=data['name'],
        buildings=tuple(_building(b, j)
                        for j, b in enumerate(_list(data['buildings'], 'buildings'))),
        zones=tuple(
            RestrictedZone(_pair(z, f'zones[{k}]'))
            for k, z in enumerate(_list(data['zones'], 'zones'))),
        d_min=_number(data['d_min'], 'd_min'),
        drone_starts=tuple(
            _pair(p, f'drone_starts[{i}]')
            for i, p in enumerate(_list(data['drone_starts'], 'drone_starts'))),
        A=_matrix(data['A'], 'A'),
        B=_matrix(data['B'], 'B'),
        horizon=_integer(data['horizon'], 'horizon'),
        lambda_=_number(data['lambda'], 'lambda'),
    )


def scenario_to_dict(scenario):
    return {
        'name': scenario.name,
        'd_min': scenario.d_min,
        'lambda': scenario.lambda_,
        'horizon': int(scenario.horizon),
        'A': [list(row) for row in scenario.A],
        'B': [list(row) for row in scenario.B],
        'drone_starts': [list(p) for p in scenario.drone_starts],
        'buildings': [{
            'x': b.x,
            'y': b.y,
            'kind': b.kind.value,
            'cost': b.cost
        } for b in scenario.buildings],
        'zones': [list(z.position) for z in scenario.zones],
    }


def parse_scenario(text):
    """ Parse a scenario document without checking its invariants. """
    try:
        data = json.loads(text, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(e.msg, line=e.lineno) from None
    return scenario_from_dict(data)


def load_scenario(text):
    """ Parse a scenario document (UTF-8 json) and validate it.

    Parameters
    ----------
    text : str
        Contents of the scenario file.

    Returns
    -------
    Scenario
        Scenario satisfying every invariant.

    Raises
    ------
    ScenarioParseError
        Malformed json or schema violation (line / field in the message).
    ScenarioError
        The document parses but the scenario breaks an invariant.
    """
    scenario = parse_scenario(text)
    violations = validate(scenario)
    if violations:
        raise ScenarioError(f'scenario {scenario.name!r} is invalid: ' + '; '.join(violations))
    return scenario


def save_scenario(scenario):
    """ Serialize a scenario to its json document (keys in schema order). """
    for field, value in (('d_min', scenario.d_min), ('lambda', scenario.lambda_)):
        if not math.isfinite(value):
            raise ScenarioError(f'{field} must be finite to be saved, got {value!r}')
    return json.dumps(scenario_to_dict(scenario), indent=2, allow_nan=False) + '\n'


def read_scenario(path):
    logger.info('reading scenario from %s', path)
    return load_scenario(File(path).read_text())


def write_scenario(scenario, path):
    return File(path).write_text(save_scenario(scenario))


def cost_history_frame(result):
    rows = [[it, c.delivery, c.restricted, c.penalty, c.total]
            for it, c in enumerate(result.cost_history)]
    return pd.DataFrame(rows, columns=COST_HISTORY_COLUMNS)


def trajectory_frame(trajectories, drone_ids=None):
    """ One row per drone and timestep t = 0..N; the control of the last state is empty. """
    if drone_ids is None:
        drone_ids = list(range(len(trajectories)))
    rows = []
    for drone, traj in zip(drone_ids, trajectories):
        for t, state in enumerate(traj.states):
            if t < traj.horizon:
                u_x, u_y = traj.controls[t]
            else:
                u_x, u_y = float('nan'), float('nan')
            rows.append([drone, t, state[0], state[1], u_x, u_y])
    return pd.DataFrame(rows, columns=TRAJECTORY_COLUMNS)


def fleet_plan_frame(plan, scenario):
    rows = []
    for drone in sorted(plan.per_drone_tours):
        for order, j in enumerate(plan.per_drone_tours[drone]):
            b = scenario.buildings[j]
            rows.append([drone, order, b.x, b.y, b.kind.value, b.cost])
    return pd.DataFrame(rows, columns=FLEET_PLAN_COLUMNS)


def learning_curve_frame(history):
    rows = [[e, history.returns[e], history.td_losses[e], history.epsilons[e]]
            for e in range(len(history.returns))]
    return pd.DataFrame(rows, columns=LEARNING_CURVE_COLUMNS)


def policy_path_frame(rollout):
    rows = []
    for agent, steps in enumerate(rollout.steps):
        for step in steps:
            rows.append([agent, step.step, step.cell[0], step.cell[1],
                         step.action.name.lower() if step.action is not None else '',
                         step.reward])
    return pd.DataFrame(rows, columns=POLICY_PATH_COLUMNS)
