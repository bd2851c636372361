from src.scenario import IDENTITY, Building, RestrictedZone, Scenario
from src.utils.enumerators import BuildingKind
from src.utils.errors import UnknownScenarioError

HOME_COST = 1.0
OFFICE_COST = 2.0
SHOP_COST = 1.5

# env1: small grid world, 3 drones
_ENV1_HOMES = [(2, 3), (5, 7), (9, 2), (12, 5), (15, 8)]
_ENV1_OFFICES = [(8, 6), (3, 8), (10, 10), (14, 3)]
_ENV1_SHOPS = [(4, 5), (7, 4), (11, 7), (13, 6)]
_ENV1_ZONES = [(3, 4), (6, 6), (1, 2), (7, 3), (10, 5), (12, 9)]
_ENV1_STARTS = [(0, 0), (1, 1), (2, 2)]

# env2: env1 extended to the east, 5 drones
_ENV2_HOMES = _ENV1_HOMES + [(18, 10), (20, 4), (22, 7), (25, 9)]
_ENV2_OFFICES = _ENV1_OFFICES + [(17, 5), (19, 8), (21, 2), (24, 6)]
_ENV2_SHOPS = _ENV1_SHOPS + [(16, 9), (20, 3), (23, 5), (26, 8)]
_ENV2_ZONES = _ENV1_ZONES + [(15, 2), (18, 7), (20, 5), (22, 3), (24, 8), (26, 4), (28, 6),
                             (30, 3), (32, 7), (34, 5), (36, 9)]
_ENV2_STARTS = [(0, 0), (1, 1), (2, 2), (3, 3), (4, 4)]


def _buildings(homes, offices, shops):
    ret = [Building(p, BuildingKind.HOME, HOME_COST) for p in homes]
    ret += [Building(p, BuildingKind.OFFICE, OFFICE_COST) for p in offices]
    ret += [Building(p, BuildingKind.SHOP, SHOP_COST) for p in shops]
    return tuple(ret)


def _env1():
    return Scenario(name='env1',
                    buildings=_buildings(_ENV1_HOMES, _ENV1_OFFICES, _ENV1_SHOPS),
                    zones=tuple(RestrictedZone(p) for p in _ENV1_ZONES),
                    d_min=1.0,
                    drone_starts=tuple(_ENV1_STARTS),
                    A=IDENTITY,
                    B=IDENTITY,
                    horizon=20,
                    lambda_=30.0)


def _env2():
    return Scenario(name='env2',
                    buildings=_buildings(_ENV2_HOMES, _ENV2_OFFICES, _ENV2_SHOPS),
                    zones=tuple(RestrictedZone(p) for p in _ENV2_ZONES),
                    d_min=1.0,
                    drone_starts=tuple(_ENV2_STARTS),
                    A=IDENTITY,
                    B=IDENTITY,
                    horizon=30,
                    lambda_=10.0)


BUILTIN_SCENARIOS = {
    'env1': _env1,
    'env2': _env2,
}


def builtin_ids():
    return list(BUILTIN_SCENARIOS)


def builtin_scenario(scenario_id):
    """ Return one of the two reference grid-world environments.

    Parameters
    ----------
    scenario_id : str
        'env1' (13 buildings, 6 zones, 3 drones, N=20, lambda=30) or
        'env2' (25 buildings, 17 zones, 5 drones, N=30, lambda=10).

    Returns
    -------
    Scenario
        A fresh, immutable scenario.
    """
    try:
        factory = BUILTIN_SCENARIOS[scenario_id]
    except KeyError:
        raise UnknownScenarioError(scenario_id, builtin_ids()) from None
    return factory()
