import math
from itertools import combinations, permutations

import numpy as np
import pytest

from src.mpc.fleet import (FinalStateEvaluator, extract_tour, flat_cost_evaluator,
                           make_evaluator, nearest_drone_assignment, plan_fleet, select_fleet,
                           start_distance_evaluator, tour_length, weighted_geometric_median)
from src.mpc.optimizer import OptimizerConfig
from src.scenario import Building, Scenario
from src.utils.enumerators import EvaluatorType
from src.utils.errors import ScenarioError
from tests.conftest import random_scenario


def _start_of(scenario, drone):
    return scenario.drone_starts[drone]


def test_env1_uses_one_drone(env1):
    plan = select_fleet(env1, lambda_fleet=30)
    assert plan.active_drones == (2, ), plan.format_subset_table()
    assert len(plan.subset_table) == 7
    # the drone starting at (2, 2) flies to (2, 3) first
    assert plan.per_drone_tours[2][0] == 0
    assert sorted(plan.assignment) == list(range(env1.n_buildings))


def test_env2_uses_two_drones(env2):
    plan = select_fleet(env2, lambda_fleet=10)
    assert plan.n_active == 2, plan.format_subset_table()
    j = env2.buildings.index(Building((2, 3), 'home', 1.0))
    assert _start_of(env2, plan.assignment[j]) == (2.0, 2.0), plan.format_subset_table()


def test_fleet_penalty_defaults_to_scenario_lambda(env1):
    assert select_fleet(env1).lambda_fleet == 30.0


def test_flat_evaluator_prefers_first_single_drone(env1):
    plan = select_fleet(env1, lambda_fleet=30, per_drone_costs=flat_cost_evaluator)
    assert plan.active_drones == (0, )
    assert plan.objective == env1.total_building_cost + 30


def _brute_assignment(scenario, subset):
    ret = {}
    for j, b in enumerate(scenario.buildings):
        best, best_d = None, math.inf
        for i in subset:
            s = scenario.drone_starts[i]
            d = math.hypot(b.x - s[0], b.y - s[1])
            if d < best_d:
                best, best_d = i, d
        ret[j] = best
    return ret


def _brute_drone_cost(scenario, drone):
    start = scenario.drone_starts[drone]

    def cost(buildings):
        total = 0.0
        for j in buildings:
            b = scenario.buildings[j]
            total += b.cost * math.hypot(b.x - start[0], b.y - start[1])
        return total
    return cost


def test_matches_subset_enumeration():
    rng = np.random.default_rng(11)
    for case in range(50):
        scenario = random_scenario(rng, int(rng.integers(1, 5)), int(rng.integers(1, 7)))
        lambda_fleet = float(rng.uniform(0, 20))
        costs = {i: _brute_drone_cost(scenario, i) for i in range(scenario.n_drones)}
        best = math.inf
        for size in range(1, scenario.n_drones + 1):
            for subset in combinations(range(scenario.n_drones), size):
                assignment = _brute_assignment(scenario, subset)
                per_drone = {i: costs[i](tuple(j for j, d in assignment.items() if d == i))
                             for i in subset}
                best = min(best, sum(per_drone[i] for i in subset) + lambda_fleet * size)
        plan = select_fleet(scenario, lambda_fleet, costs)
        assert plan.objective == best, plan.format_subset_table()


def test_final_state_evaluator_subset_enumeration():
    rng = np.random.default_rng(12)
    evaluator = FinalStateEvaluator()
    for case in range(10):
        scenario = random_scenario(rng, int(rng.integers(1, 5)), int(rng.integers(1, 7)))
        plan = select_fleet(scenario, 5.0, evaluator)
        assert plan.objective == min(objective for _, objective in plan.subset_table)
        assert len(plan.subset_table) == 2**scenario.n_drones - 1


def test_ties_prefer_fewer_then_lexicographic():
    scenario = Scenario(name='twins', buildings=(Building((5, 0), cost=1.0), ),
                        drone_starts=((0, 0), (10, 0), (5, 5)), horizon=3)
    plan = select_fleet(scenario, 0.0, start_distance_evaluator)
    assert plan.active_drones == (0, )
    assert nearest_drone_assignment(scenario, (0, 1)) == {0: 0}


def test_near_tie_keeps_the_exact_minimum():
    scenario = Scenario(name='near tie', buildings=(Building((5, 0), cost=1.0), ),
                        drone_starts=((0, 0), (10, 0)), horizon=3)
    costs = {0: lambda buildings: 1.0 + 5e-10 if buildings else 0.0,
             1: lambda buildings: 1.0 if buildings else 0.0}
    plan = select_fleet(scenario, 0.0, costs)
    assert plan.active_drones == (0, )
    assert plan.objective == 1.0
    assert plan.per_drone_costs == {0: 1.0 + 5e-10}
    assert plan.subset_table == [((0, ), 1.0 + 5e-10), ((1, ), 1.0), ((0, 1), 1.0 + 5e-10)]


def test_building_on_start_costs_only_the_fleet_penalty():
    scenario = Scenario(name='doorstep', buildings=(Building((2, 2), cost=4.0), ),
                        drone_starts=((2, 2), (7, 7)), horizon=3, lambda_=6.0)
    plan = select_fleet(scenario)
    assert plan.active_drones == (0, )
    assert plan.objective == 6.0


def test_select_fleet_errors(env1):
    with pytest.raises(ScenarioError):
        select_fleet(Scenario(name='none', buildings=()))
    with pytest.raises(ValueError):
        select_fleet(env1, lambda_fleet=-1)
    crowd = env1.replace(drone_starts=tuple((float(i), 0.0) for i in range(17)), zones=())
    with pytest.raises(ValueError):
        select_fleet(crowd)


def test_weighted_geometric_median():
    square = np.array([[0, 0], [2, 0], [2, 2], [0, 2]], dtype=float)
    median, value = weighted_geometric_median(square, np.ones(4))
    assert np.allclose(median, [1, 1], atol=1e-9)
    assert math.isclose(value, 4 * math.sqrt(2))
    # a heavy enough point is its own median
    median, _ = weighted_geometric_median(square, [10, 1, 1, 1])
    assert np.allclose(median, [0, 0])
    median, value = weighted_geometric_median(square[:1], [3.0])
    assert median.tolist() == [0, 0] and value == 0.0
    median, value = weighted_geometric_median(square, [0, 0, 0, 0])
    assert value == 0.0


def test_final_state_evaluator_values():
    scenario = Scenario(name='line', buildings=(Building((4, 0), cost=3.0), ),
                        drone_starts=((0, 0), ))
    # a heavy building pulls the final state onto itself; the flight costs 4
    assert math.isclose(FinalStateEvaluator()(scenario, 0, (0, )), 4.0)
    assert FinalStateEvaluator()(scenario, 0, ()) == 0.0
    with pytest.raises(ValueError):
        FinalStateEvaluator(reach_weight=-1)


def test_make_evaluator():
    assert make_evaluator('flat') is flat_cost_evaluator
    assert make_evaluator(EvaluatorType.START_DISTANCE) is start_distance_evaluator
    assert isinstance(make_evaluator(), FinalStateEvaluator)
    assert make_evaluator('final-state', reach_weight=2.5).reach_weight == 2.5


def test_tours_against_permutations():
    rng = np.random.default_rng(13)
    for case in range(20):
        scenario = random_scenario(rng, int(rng.integers(1, 4)), int(rng.integers(1, 7)))
        plan = select_fleet(scenario, 1.0, start_distance_evaluator)
        for drone in plan.active_drones:
            tour = plan.per_drone_tours[drone]
            assert sorted(tour) == plan.buildings_of(drone)
            best = min(tour_length(scenario, drone, p) for p in permutations(tour))
            assert tour_length(scenario, drone, tour) >= best - 1e-9


def test_tour_on_a_line_is_optimal():
    scenario = Scenario(name='street',
                        buildings=(Building((5, 0)), Building((1, 0)), Building((3, 0))),
                        drone_starts=((0, 0), ))
    plan = select_fleet(scenario, 0.0)
    assert extract_tour(plan, scenario) == {0: [1, 2, 0]}
    assert tour_length(scenario, 0, [1, 2, 0]) == 5.0


def test_plan_fleet_env1(env1):
    run = plan_fleet(env1, OptimizerConfig(max_iterations=300))
    assert run.plan.n_active == 1
    assert len(run.result.trajectories) == 1
    start = env1.starts[run.plan.active_drones[0]]
    assert np.array_equal(run.result.trajectories[0].start, start)
    assert run.total_cost == run.result.final_cost.total + 30.0 * 1
