import os

import pandas as pd
import pytest

from src.cli import main
from src.utils.converter import write_scenario
from src.utils.general_utils import OUTPUT_DIR_ENV

DATA_DIR = os.path.join(os.path.dirname(__file__), 'data')


@pytest.fixture
def tiny_file(tiny, tmp_path):
    return write_scenario(tiny, str(tmp_path / 'tiny.json'))


def test_scenarios(capsys):
    assert main(['scenarios']) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines == ['env1: M=13 K=6 n=3 N=20 lambda=30', 'env2: M=25 K=17 n=5 N=30 lambda=10']


def test_validate(capsys):
    assert main(['validate', '--file', os.path.join(DATA_DIR, 'minimal.json')]) == 0
    assert capsys.readouterr().out.startswith('ok: minimal')
    assert main(['validate', '--file', os.path.join(DATA_DIR, 'bad_negative_cost.json')]) == 1
    out = capsys.readouterr().out
    assert 'violation: buildings[1]' in out
    assert main(['validate', '--scenario', 'env1']) == 0


@pytest.mark.parametrize('argv', [
    ['run-mpc', '--no-such-flag'],
    ['run-mpc'],
    ['run-mpc', '--scenario', 'env1', '--file', os.path.join(DATA_DIR, 'minimal.json')],
    ['run-mpc', '--scenario', 'env9'],
    ['run-mpc', '--scenario', 'env1', '--horizon', '0'],
    ['run-mpc', '--scenario', 'env1', '--alpha', '2'],
    ['run-mpc', '--scenario', 'env1', '--evaluator', 'exact'],
    ['train-marl', '--scenario', 'env1', '--method', 'mpc'],
    ['compare', '--scenario', 'env1', '--format', 'xml'],
    ['compare', '--scenario', 'env1', '--seeds', 'a,b'],
    ['emit'],
])
def test_invalid_input_exits_1(argv, tmp_path):
    assert main(argv + ['--output-dir', str(tmp_path)] if argv[0] != 'emit' else argv) == 1


def test_run_mpc_env2(tmp_path, capsys):
    assert main(['run-mpc', '--scenario', 'env2', '--max-iters', '200',
                 '--output-dir', str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert 'active drones: 2 ((2, 2), (4, 4))' in out
    plan = pd.read_csv(tmp_path / 'env2_fleet_plan.csv')
    assert sorted(plan['drone'].unique()) == [2, 4]
    assert len(plan) == 25
    history = pd.read_csv(tmp_path / 'env2_cost_history.csv')
    assert 1 <= len(history) <= 201
    trajectories = pd.read_csv(tmp_path / 'env2_trajectories.csv')
    assert len(trajectories) == 2 * 31


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / 'env-out'))
    assert main(['run-mpc', '--file', os.path.join(DATA_DIR, 'minimal.json'),
                 '--max-iters', '50']) == 0
    assert (tmp_path / 'env-out' / 'minimal_fleet_plan.csv').exists()


def test_train_marl(tiny_file, tmp_path, capsys):
    assert main(['train-marl', '--file', tiny_file, '--method', 'vdn', '--episodes', '20',
                 '--max-steps', '30', '--output-dir', str(tmp_path)]) == 0
    assert capsys.readouterr().out.splitlines()[-1].startswith('vdn: ')
    curve = pd.read_csv(tmp_path / 'tiny_vdn_learning_curve.csv')
    assert len(curve) == 20
    assert (tmp_path / 'tiny_vdn_policy_path.csv').exists()


def test_train_marl_jal_over_budget_exits_2(tmp_path, capsys):
    assert main(['train-marl', '--scenario', 'env2', '--method', 'jal',
                 '--output-dir', str(tmp_path)]) == 2
    assert 'budget' in capsys.readouterr().err


def test_compare_and_emit(tiny_file, tmp_path, capsys):
    out_dir = tmp_path / 'reports'
    assert main(['compare', '--file', tiny_file, '--seeds', '0,1', '--episodes', '10',
                 '--max-iters', '100', '--output-dir', str(out_dir)]) == 0
    out = capsys.readouterr().out
    assert 'Scenario: tiny' in out
    assert (out_dir / 'tiny_report.txt').exists()
    report = str(out_dir / 'tiny_report.csv')
    assert len(pd.read_csv(report)) == 8

    assert main(['emit', '--report', report, '--format', 'csv']) == 0
    with open(report) as f:
        assert capsys.readouterr().out == f.read()
    assert main(['emit', '--report', report]) == 0
    assert capsys.readouterr().out.startswith('Scenario: tiny')


def test_compare_with_config_bundle(tiny_file, tmp_path, capsys):
    assert main(['compare', '--file', tiny_file, '--methods', 'mpc,iql',
                 '--config', os.path.join(DATA_DIR, 'bench.yaml'),
                 '--output-dir', str(tmp_path), '--format', 'csv']) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[-3].startswith('scenario,method')
    assert [line.split(',')[1] for line in lines[-2:]] == ['mpc', 'iql']


def test_help_shows_defaults(capsys):
    assert main(['run-mpc', '--help']) == 0
    out = capsys.readouterr().out
    assert 'default:' in out
    assert '0.001' in out
    assert '20000' in out
    assert main(['--help']) == 0
    assert 'compare' in capsys.readouterr().out
