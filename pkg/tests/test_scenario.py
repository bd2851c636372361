import pytest

from src.data.builtin_scenarios import builtin_ids, builtin_scenario
from src.data.make_dataset import make_dataset
from src.scenario import Building, RestrictedZone, Scenario
from src.utils.converter import read_scenario
from src.utils.enumerators import BuildingKind
from src.utils.errors import ScenarioError, UnknownScenarioError
from src.utils.validations import is_valid, validate


def test_env1_contents(env1):
    assert env1.n_buildings == 13
    assert env1.n_zones == 6
    assert env1.n_drones == 3
    assert env1.d_min == 1.0
    assert env1.horizon == 20
    assert env1.lambda_ == 30.0
    assert Building((2, 3), BuildingKind.HOME, 1.0) in env1.buildings
    assert env1.drone_starts == ((0.0, 0.0), (1.0, 1.0), (2.0, 2.0))
    assert env1.A == env1.B == ((1.0, 0.0), (0.0, 1.0))
    assert env1.total_building_cost == 19.0


def test_env2_contents(env2):
    assert env2.n_buildings == 25
    assert env2.n_zones == 17
    assert env2.n_drones == 5
    assert env2.drone_starts[-1] == (4.0, 4.0)
    assert env2.horizon == 30
    assert env2.lambda_ == 10.0
    assert env2.total_building_cost == 37.0
    kinds = [b.kind for b in env2.buildings]
    assert kinds.count(BuildingKind.HOME) == 9
    assert kinds.count(BuildingKind.OFFICE) == 8
    assert kinds.count(BuildingKind.SHOP) == 8


def test_builtin_ids():
    assert builtin_ids() == ['env1', 'env2']
    # every call returns an equal, fresh scenario
    assert builtin_scenario('env1') == builtin_scenario('env1')


def test_unknown_builtin_names_valid_ids():
    with pytest.raises(UnknownScenarioError) as info:
        builtin_scenario('env3')
    assert 'env1' in str(info.value) and 'env2' in str(info.value)
    assert isinstance(info.value, ScenarioError)


def test_validate_builtins(env1, env2):
    assert validate(env1) == []
    assert validate(env2) == []
    assert is_valid(env1)


def test_validate_start_inside_zone(env1):
    scenario = env1.replace(drone_starts=((3, 4), ))
    violations = validate(scenario)
    assert len(violations) == 1
    assert 'drone_starts[0]' in violations[0]
    assert 'zones[0]' in violations[0]


def test_validate_zero_horizon(env1):
    violations = validate(env1.replace(horizon=0))
    assert len(violations) == 1
    assert violations[0].startswith('horizon')


def test_validate_negative_cost_and_empty_lists():
    scenario = Scenario(name='bad', buildings=(Building((1, 1), cost=-1.0), ), drone_starts=())
    violations = validate(scenario)
    assert any(v.startswith('buildings[0]') for v in violations)
    assert any(v.startswith('drone_starts') for v in violations)
    assert not is_valid(Scenario(name='empty', buildings=()))


def test_start_exactly_at_d_min_is_valid():
    scenario = Scenario(name='edge',
                        buildings=(Building((5, 5)), ),
                        zones=(RestrictedZone((1, 0)), ),
                        d_min=1.0,
                        drone_starts=((0, 0), ))
    assert validate(scenario) == []


def test_validate_is_pure(env1):
    before = builtin_scenario('env1')
    validate(env1)
    assert env1 == before


def test_with_drones(env2):
    sub = env2.with_drones([4, 2])
    assert sub.drone_starts == ((4.0, 4.0), (2.0, 2.0))
    assert sub.buildings == env2.buildings
    assert sub.starts.shape == (2, 2)
    with pytest.raises(ValueError):
        env2.with_drones([])
    with pytest.raises(ValueError):
        env2.with_drones([5])


def test_arrays_are_read_only(env1):
    assert env1.building_positions.shape == (13, 2)
    assert list(env1.building_costs[:5]) == [1.0] * 5
    with pytest.raises(ValueError):
        env1.building_positions[0, 0] = 99.0
    assert env1.zone_positions.shape == (6, 2)


def test_scenario_without_zones_has_empty_zone_array():
    scenario = Scenario(name='open', buildings=(Building((1, 2)), ))
    assert scenario.zone_positions.shape == (0, 2)


def test_make_dataset_writes_builtins(tmp_path):
    paths = make_dataset(str(tmp_path))
    assert [p.rsplit('/', 1)[-1] for p in paths] == ['env1.json', 'env2.json']
    for scenario_id, path in zip(builtin_ids(), paths):
        assert read_scenario(path) == builtin_scenario(scenario_id)
