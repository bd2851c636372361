import numpy as np
import pytest

from src.data.builtin_scenarios import builtin_scenario
from src.scenario import Building, RestrictedZone, Scenario
from src.utils.enumerators import BuildingKind


@pytest.fixture
def env1():
    return builtin_scenario('env1')


@pytest.fixture
def env2():
    return builtin_scenario('env2')


@pytest.fixture
def tiny():
    """Two drones, three buildings, one zone."""
    return Scenario(name='tiny',
                    buildings=(Building((3, 1), BuildingKind.HOME, 1.0),
                               Building((0, 3), BuildingKind.OFFICE, 2.0),
                               Building((4, 3), BuildingKind.SHOP, 1.5)),
                    zones=(RestrictedZone((2, 2)), ),
                    d_min=1.0,
                    drone_starts=((0, 0), (4, 0)),
                    horizon=10,
                    lambda_=2.0)


def random_scenario(rng, n_drones, n_buildings, n_zones=0, size=10.0, name='random'):
    """Scenario with integer-free random coordinates; starts are kept d_min away from zones."""
    zones = tuple(RestrictedZone(rng.uniform(0, size, 2)) for _ in range(n_zones))
    starts = []
    while len(starts) < n_drones:
        p = rng.uniform(0, size, 2)
        if all(np.hypot(*(p - z.position)) >= 1.0 for z in zones):
            starts.append(p)
    buildings = tuple(
        Building(rng.uniform(0, size, 2), BuildingKind.CUSTOM, float(rng.uniform(0.5, 3.0)))
        for _ in range(n_buildings))
    return Scenario(name=name,
                    buildings=buildings,
                    zones=zones,
                    d_min=1.0,
                    drone_starts=tuple(starts),
                    horizon=int(rng.integers(1, 8)),
                    lambda_=float(rng.uniform(0.0, 5.0)))
