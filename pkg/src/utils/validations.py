import math
import os

import numpy as np

from src.utils.enumerators import EvaluatorType, Method, ReportFormat


def _finite_point(point):
    return all(math.isfinite(float(v)) for v in point)


def validate(scenario):
    """ Check every invariant of a scenario without modifying it.

    Parameters
    ----------
    scenario : Scenario
        Scenario to be checked.

    Returns
    -------
    list
        One message per violation, naming the field and its index. Empty when the
        scenario is consistent.
    """
    violations = []
    if len(scenario.buildings) < 1:
        violations.append('buildings: at least one building is required (M >= 1)')
    if len(scenario.drone_starts) < 1:
        violations.append('drone_starts: at least one drone is required (n >= 1)')
    if not isinstance(scenario.horizon, (int, np.integer)) or isinstance(scenario.horizon, bool):
        violations.append(f'horizon: must be an integer, got {scenario.horizon!r}')
    elif scenario.horizon < 1:
        violations.append(f'horizon: must be >= 1, got {scenario.horizon}')
    if not math.isfinite(scenario.d_min) or scenario.d_min < 0:
        violations.append(f'd_min: must be a finite non-negative number, got {scenario.d_min!r}')
    if not math.isfinite(scenario.lambda_) or scenario.lambda_ < 0:
        violations.append(
            f'lambda: must be a finite non-negative number, got {scenario.lambda_!r}')
    for name, matrix in (('A', scenario.A), ('B', scenario.B)):
        if not all(math.isfinite(v) for row in matrix for v in row):
            violations.append(f'{name}: matrix entries must be finite')

    for j, building in enumerate(scenario.buildings):
        if not _finite_point(building.position):
            violations.append(f'buildings[{j}]: position {building.position} is not finite')
        if not math.isfinite(building.cost) or building.cost < 0:
            violations.append(f'buildings[{j}]: cost must be >= 0, got {building.cost!r}')
    for k, zone in enumerate(scenario.zones):
        if not _finite_point(zone.position):
            violations.append(f'zones[{k}]: position {zone.position} is not finite')

    for i, start in enumerate(scenario.drone_starts):
        if not _finite_point(start):
            violations.append(f'drone_starts[{i}]: position {start} is not finite')
            continue
        for k, zone in enumerate(scenario.zones):
            if not _finite_point(zone.position):
                continue
            distance = math.hypot(start[0] - zone.position[0], start[1] - zone.position[1])
            if distance < scenario.d_min:
                violations.append(
                    f'drone_starts[{i}]: start ({start[0]:g}, {start[1]:g}) is {distance:g} from '
                    f'zones[{k}], closer than d_min={scenario.d_min:g}')
    return violations


def is_valid(scenario):
    return len(validate(scenario)) == 0


def is_yaml(file_path):
    return os.path.splitext(file_path)[-1].lower() in ('.yaml', '.yml')


def validate_method(arg_method, errors):
    """ Verify if a string names a planning method.

        Parameters
        ----------
        arg_method : str
            Received argument (e.g. 'mpc', 'IQL').
        errors : list
            List with error messages to be appended with error message in case an error occurs.

        Returns
        -------
        Method : Enum
            The method, or None when the string is not valid.
    """
    try:
        return Method(arg_method.strip().lower())
    except ValueError:
        errors.append(f'invalid method {arg_method!r}. It must be either '
                      f'{", ".join(m.value for m in Method)}')
        return None


def validate_methods(arg_methods, errors):
    methods = []
    for item in arg_methods.split(','):
        if item.strip() == '':
            continue
        method = validate_method(item, errors)
        if method is not None and method not in methods:
            methods.append(method)
    if len(methods) == 0 and len(errors) == 0:
        errors.append('at least one method is required')
    return methods


def validate_report_format(arg_format, errors):
    try:
        return ReportFormat(arg_format.lower())
    except ValueError:
        errors.append(f'invalid report format {arg_format!r}. It must be either \'text\' or '
                      '\'csv\'')
        return None


def validate_evaluator(arg_evaluator, errors):
    try:
        return EvaluatorType(arg_evaluator.lower())
    except ValueError:
        errors.append(f'invalid evaluator {arg_evaluator!r}. It must be either '
                      f'{", ".join(e.value for e in EvaluatorType)}')
        return None
