import math
import os
from dataclasses import replace

import pytest

from src.bench.harness import (REPORT_COLUMNS, BenchConfig, ComparisonReport, RunMetrics,
                               emit_report, load_report, run_comparison, run_method)
from src.marl.grid_mdp import MarlEnvConfig
from src.marl.q_learning import TrainConfig
from src.mpc.fleet import make_evaluator, plan_fleet
from src.mpc.optimizer import OptimizerConfig
from src.scenario import Building, Scenario
from src.utils.enumerators import EvaluatorType, Method
from src.utils.errors import MethodRunError

DATA_DIR = os.path.join(os.path.dirname(__file__), 'data')


@pytest.fixture
def quick():
    return BenchConfig(optimizer=OptimizerConfig(max_iterations=200),
                       train=TrainConfig(episodes=20),
                       env=MarlEnvConfig(max_steps=30))


def _without_time(rows):
    return [replace(row, wall_time_seconds=0.0) for row in rows]


def test_single_row(tiny, quick):
    report = run_comparison(tiny, ['mpc'], [0], quick)
    assert len(report.rows) == 1
    row = report.rows[0]
    assert (row.scenario, row.method, row.seed) == ('tiny', Method.MPC, 0)
    assert row.wall_time_seconds > 0
    assert row.host


def test_rows_follow_method_then_seed(tiny, quick):
    report = run_comparison(tiny, list(Method), [0, 1, 2], quick)
    assert len(report.rows) == 12
    assert [(r.method, r.seed) for r in report.rows] == \
        [(m, s) for m in Method for s in (0, 1, 2)]
    assert report.methods == list(Method)
    assert all(not r.failed for r in report.rows)


def test_jal_over_budget_is_a_failed_row(quick):
    crowd = Scenario(name='crowd', buildings=(Building((6, 6)), ),
                     drone_starts=tuple((float(i), 0.0) for i in range(5)))
    report = run_comparison(crowd, ['iql', 'jal'], [0], quick)
    iql, jal = report.rows
    assert not iql.failed
    assert jal.failed and math.isnan(jal.min_total_cost)
    assert 'jal' in jal.error
    assert report.aggregate()[Method.JAL] is None
    text = emit_report(report)
    assert text.splitlines()[6].split()[-1] == 'failed'
    assert 'failed: jal seed 0' in text
    with pytest.raises(MethodRunError):
        run_method(crowd, 'jal', quick)


def test_mpc_metrics_match_the_planner(tiny, quick):
    row = run_method(tiny, Method.MPC, quick, seed=3)
    run = plan_fleet(tiny, replace(quick.optimizer, seed=3), None,
                     make_evaluator(EvaluatorType.FINAL_STATE))
    assert row.optimal_drones == run.plan.n_active
    assert row.min_total_cost == run.total_cost
    assert row.converged == run.result.converged


def test_building_on_start_costs_the_fleet_penalty(quick):
    doorstep = Scenario(name='doorstep', buildings=(Building((2, 2), cost=4.0), ),
                        drone_starts=((2, 2), (7, 7)), horizon=5, lambda_=6.0)
    config = replace(quick, optimizer=OptimizerConfig(init_noise=0.0))
    row = run_method(doorstep, 'mpc', config)
    assert row.optimal_drones == 1
    assert row.min_total_cost == 6.0
    assert row.converged


def test_text_report_layout(tiny, quick):
    report = run_comparison(tiny, ['vdn', 'mpc', 'jal', 'iql'], [0], quick)
    lines = emit_report(report, 'text').splitlines()
    assert lines[0] == 'Scenario: tiny'
    assert lines[1].startswith('Seeds: 0')
    assert lines[2].startswith('Host: ')
    assert lines[4].split() == ['MPC', 'IQL', 'JAL', 'VDN']
    assert lines[6].startswith('Optimal number of drones')
    assert lines[7].startswith('Minimum total cost (artifact scale)')
    assert lines[8].startswith('Time to convergence (s)')


def test_csv_round_trip(tiny, quick):
    report = run_comparison(tiny, ['mpc', 'iql'], [0, 1], quick)
    text = emit_report(report, 'csv')
    assert text.splitlines()[0] == ','.join(REPORT_COLUMNS)
    loaded = load_report(text)
    assert loaded.scenario == 'tiny'
    assert loaded.rows == report.rows


def test_load_report_errors():
    with pytest.raises(ValueError):
        load_report('scenario,method\ntiny,mpc\n')
    with pytest.raises(ValueError):
        load_report(','.join(REPORT_COLUMNS) + '\n')


def test_runs_are_deterministic_except_wall_time(tiny, quick):
    a = run_comparison(tiny, list(Method), [5], quick)
    b = run_comparison(tiny, list(Method), [5], quick)
    assert _without_time(a.rows) == _without_time(b.rows)


def test_workers_keep_row_order(tiny, quick):
    sequential = run_comparison(tiny, ['mpc', 'iql', 'vdn'], [0, 1], quick)
    parallel = run_comparison(tiny, ['mpc', 'iql', 'vdn'], [0, 1], replace(quick, workers=2))
    assert _without_time(parallel.rows) == _without_time(sequential.rows)


def test_run_comparison_needs_work(tiny):
    with pytest.raises(ValueError):
        run_comparison(tiny, [], [0])
    with pytest.raises(ValueError):
        run_comparison(tiny, ['mpc'], [])


def test_aggregate_takes_medians():
    rows = [RunMetrics('s', Method.IQL, seed, drones, cost, 1.0, True)
            for seed, drones, cost in [(0, 1, 3.0), (1, 3, 1.0), (2, 2, 2.0)]]
    assert ComparisonReport('s', rows).aggregate()[Method.IQL] == \
        {'optimal_drones': 2, 'min_total_cost': 2.0, 'wall_time_seconds': 1.0}


###################################################
#      config bundle
###################################################
def test_bundle_from_yaml():
    config = BenchConfig.from_yaml(os.path.join(DATA_DIR, 'bench.yaml'))
    assert config.optimizer.learning_rate == 0.002
    assert config.optimizer.max_iterations == 300
    assert (config.train.episodes, config.train.gamma) == (20, 0.9)
    assert config.env.max_steps == 40
    assert config.lambda_fleet == 3.0
    assert config.evaluator == EvaluatorType.START_DISTANCE
    assert config.with_seed(7).train.seed == 7
    assert config.with_seed(7).optimizer.seed == 7


@pytest.mark.parametrize('data', [
    {'solver': {}},
    {'train': {'episode': 3}},
    {'bench': {'optimizer': {}}},
    {'env': [1, 2]},
    {'bench': {'workers': 0}},
    {'train': {'alpha': 2.0}},
])
def test_bundle_errors(data):
    with pytest.raises(ValueError):
        BenchConfig.from_dict(data)


def test_bundle_must_be_yaml():
    with pytest.raises(ValueError):
        BenchConfig.from_yaml(os.path.join(DATA_DIR, 'minimal.json'))


def test_mpc_is_faster_than_the_learners(env1):
    report = run_comparison(env1, ['mpc', 'iql', 'vdn'], [0])
    mpc, iql, vdn = report.rows
    assert mpc.optimal_drones == 1
    assert mpc.wall_time_seconds < iql.wall_time_seconds
    assert mpc.wall_time_seconds < vdn.wall_time_seconds


def test_one_row_report_has_one_column(tiny, quick):
    report = run_comparison(tiny, ['iql'], [0], quick)
    lines = emit_report(report).splitlines()
    assert lines[4].split() == ['IQL']
    assert len(emit_report(report, 'csv').splitlines()) == 2
