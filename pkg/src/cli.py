"""Command-line interface.

    python main.py scenarios
    python main.py validate --file my_scenario.json
    python main.py run-mpc --scenario env1
    python main.py train-marl --scenario env1 --method vdn --episodes 2000
    python main.py compare --scenario env1 --methods mpc,iql,jal,vdn --seeds 0,1,2
    python main.py emit --report results/env1_report.csv --format text

Exit codes: 0 success, 1 invalid input (scenario, flags, config), 2 runtime failure
(divergence, table budget).
"""
import logging
import os
import sys
from dataclasses import replace

import click

from src.bench.harness import BenchConfig, emit_report, load_report, run_comparison
from src.data.builtin_scenarios import BUILTIN_SCENARIOS, builtin_ids, builtin_scenario
from src.marl.grid_mdp import discretize
from src.marl.trainers import greedy_rollout, rollout_cost, train
from src.mpc.fleet import make_evaluator, nearest_drone_assignment, plan_fleet
from src.utils import converter
from src.utils.enumerators import AssignmentMode, ReportFormat
from src.utils.errors import DroneDeliveryError, ScenarioError
from src.utils.general_utils import (DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV, default_output_dir,
                                     format_point, parse_int_list, setup_logging)
from src.utils.read_files import File
from src.utils.validations import (validate, validate_evaluator, validate_method,
                                   validate_methods, validate_report_format)

logger = logging.getLogger(__name__)


def _scenario_source(function):
    function = click.option('--file', 'file_path', type=click.Path(exists=True, dir_okay=False),
                            default=None, show_default='none',
                            help='Scenario json file (instead of --scenario).')(function)
    function = click.option('--scenario', 'scenario_id', default=None, show_default='none',
                            help=f'Builtin scenario id ({", ".join(builtin_ids())}).')(function)
    return function


def _outputs(function):
    function = click.option('--output-dir', default=None,
                            show_default=f'${OUTPUT_DIR_ENV} or {DEFAULT_OUTPUT_DIR}',
                            help='Directory receiving the data files.')(function)
    function = click.option('--config', 'config_path', type=click.Path(exists=True,
                                                                       dir_okay=False),
                            default=None, show_default='none',
                            help='YAML bundle with optimizer/train/env/bench sections.')(function)
    return function


def _scenario_overrides(function):
    function = click.option('--lambda', 'lambda_', type=float, default=None,
                            show_default='scenario value',
                            help='Scenario penalty weight lambda.')(function)
    function = click.option('--d-min', type=float, default=None, show_default='scenario value',
                            help='Minimum distance to restricted zones.')(function)
    function = click.option('--horizon', type=int, default=None, show_default='scenario value',
                            help='Lookahead horizon N.')(function)
    return function


def _load_scenario(scenario_id, file_path, horizon=None, d_min=None, lambda_=None):
    if (scenario_id is None) == (file_path is None):
        raise click.UsageError('give exactly one scenario source: --scenario ID or --file PATH')
    scenario = (builtin_scenario(scenario_id) if scenario_id is not None
                else converter.read_scenario(file_path))
    overrides = {k: v for k, v in (('horizon', horizon), ('d_min', d_min), ('lambda_', lambda_))
                 if v is not None}
    if overrides:
        scenario = scenario.replace(**overrides)
        violations = validate(scenario)
        if violations:
            raise ScenarioError('overrides make the scenario invalid: ' + '; '.join(violations))
    return scenario


def _load_bundle(config_path):
    return BenchConfig.from_yaml(config_path) if config_path else BenchConfig()


def _set(obj, **values):
    """Copy of the dataclass `obj` with the values that were actually given."""
    values = {k: v for k, v in values.items() if v is not None}
    return replace(obj, **values) if values else obj


def _checked(value, validator, flag):
    errors = []
    ret = validator(value, errors)
    if errors:
        raise click.BadParameter('; '.join(errors), param_hint=flag)
    return ret


def _write(output_dir, name, frame):
    path = File(os.path.join(output_dir, name)).write_frame(frame)
    click.echo(f'wrote {path}')
    return path


@click.group(context_settings={'help_option_names': ['-h', '--help']})
@click.option('--verbose', '-v', is_flag=True, default=False, show_default=True,
              help='Log debug messages.')
def cli(verbose):
    """ Multi-drone delivery: MPC fleet planning and tabular MARL baselines. """
    setup_logging(verbose)


@cli.command()
def scenarios():
    """ List the builtin scenarios. """
    for scenario_id in builtin_ids():
        s = BUILTIN_SCENARIOS[scenario_id]()
        click.echo(f'{scenario_id}: M={s.n_buildings} K={s.n_zones} n={s.n_drones} '
                   f'N={s.horizon} lambda={s.lambda_:g}')
    return 0


@cli.command('validate')
@_scenario_source
def validate_command(scenario_id, file_path):
    """ Check a scenario and print every violation. """
    if (scenario_id is None) == (file_path is None):
        raise click.UsageError('give exactly one scenario source: --scenario ID or --file PATH')
    if scenario_id is not None:
        scenario = builtin_scenario(scenario_id)
    else:
        scenario = converter.parse_scenario(File(file_path).read_text())
    violations = validate(scenario)
    for violation in violations:
        click.echo(f'violation: {violation}')
    if violations:
        return 1
    click.echo(f'ok: {scenario.summary()}')
    return 0


@cli.command('run-mpc')
@_scenario_source
@_scenario_overrides
@click.option('--alpha', type=float, default=None, show_default='0.001',
              help='Learning rate of the gradient descent.')
@click.option('--lambda-ctrl', type=float, default=None, show_default='scenario lambda',
              help='Control penalty weight.')
@click.option('--lambda-fleet', type=float, default=None, show_default='scenario lambda',
              help='Penalty per drone used.')
@click.option('--max-iters', type=int, default=None, show_default='20000',
              help='Iteration cap.')
@click.option('--epsilon', type=float, default=None, show_default='1e-06',
              help='Stop once |delta J| < epsilon.')
@click.option('--seed', type=int, default=None, show_default='0',
              help='Seed of the control initialisation.')
@click.option('--line-search/--no-line-search', default=None, show_default='off',
              help='Backtrack from alpha every iteration until J does not rise.')
@click.option('--evaluator', default=None, show_default='final-state',
              help='Per-drone fleet cost: final-state, start-distance or flat.')
@_outputs
def run_mpc(scenario_id, file_path, horizon, d_min, lambda_, alpha, lambda_ctrl, lambda_fleet,
            max_iters, epsilon, seed, line_search, evaluator, config_path, output_dir):
    """ Select the fleet and optimize its trajectories. """
    scenario = _load_scenario(scenario_id, file_path, horizon, d_min, lambda_)
    bundle = _load_bundle(config_path)
    optimizer = _set(bundle.optimizer, learning_rate=alpha, lambda_ctrl=lambda_ctrl,
                     max_iterations=max_iters, convergence_epsilon=epsilon, seed=seed,
                     line_search=line_search)
    evaluator_type = (bundle.evaluator if evaluator is None
                      else _checked(evaluator, validate_evaluator, '--evaluator'))
    lambda_fleet = bundle.lambda_fleet if lambda_fleet is None else lambda_fleet
    run = plan_fleet(scenario, optimizer, lambda_fleet,
                     make_evaluator(evaluator_type, bundle.reach_weight))

    output_dir = output_dir or default_output_dir()
    _write(output_dir, f'{scenario.name}_cost_history.csv',
           converter.cost_history_frame(run.result))
    _write(output_dir, f'{scenario.name}_trajectories.csv',
           converter.trajectory_frame(run.result.trajectories, run.plan.active_drones))
    _write(output_dir, f'{scenario.name}_fleet_plan.csv',
           converter.fleet_plan_frame(run.plan, scenario))

    cost = run.result.final_cost
    starts = ", ".join(format_point(scenario.drone_starts[i]) for i in run.plan.active_drones)
    click.echo(f'active drones: {run.plan.n_active} ({starts})')
    for drone, tour in run.plan.per_drone_tours.items():
        click.echo(f'  drone {drone}: ' + ' -> '.join(format_point(scenario.buildings[j].position)
                                                      for j in tour))
    click.echo(f'fleet objective: {run.plan.objective:.4f}')
    click.echo(f'J = {cost.total:.4f} (delivery {cost.delivery:.4f}, restricted '
               f'{cost.restricted:.4f}, penalty {cost.penalty:.4f}) after '
               f'{run.result.iterations_used} iteration(s), '
               f'{"converged" if run.result.converged else "not converged"}')
    click.echo(f'total cost with fleet penalty: {run.total_cost:.4f}')
    return 0


@cli.command('train-marl')
@_scenario_source
@click.option('--method', default='iql', show_default=True, help='iql, jal or vdn.')
@click.option('--episodes', type=int, default=None, show_default='1000', help='Training episodes.')
@click.option('--alpha', type=float, default=None, show_default='0.1', help='Learning rate.')
@click.option('--gamma', type=float, default=None, show_default='0.95', help='Discount.')
@click.option('--epsilon', type=float, default=None, show_default='1.0',
              help='Initial exploration rate.')
@click.option('--epsilon-end', type=float, default=None, show_default='0.05',
              help='Final exploration rate.')
@click.option('--seed', type=int, default=None, show_default='0', help='Exploration seed.')
@click.option('--max-steps', type=int, default=None, show_default='200',
              help='Episode length cap.')
@click.option('--assignment', type=click.Choice([m.value for m in AssignmentMode]),
              default=None, show_default='nearest',
              help='Nearest-start task split or shared task.')
@_outputs
def train_marl(scenario_id, file_path, method, episodes, alpha, gamma, epsilon, epsilon_end,
               seed, max_steps, assignment, config_path, output_dir):
    """ Train one tabular learner and roll out its greedy policy. """
    scenario = _load_scenario(scenario_id, file_path)
    method = _checked(method, validate_method, '--method')
    if not method.is_marl:
        raise click.BadParameter('train-marl runs iql, jal or vdn', param_hint='--method')
    bundle = _load_bundle(config_path)
    train_config = _set(bundle.train, episodes=episodes, alpha=alpha, gamma=gamma,
                        epsilon_start=epsilon, epsilon_end=epsilon_end, seed=seed)
    env = _set(bundle.env, max_steps=max_steps,
               assignment_mode=None if assignment is None else AssignmentMode(assignment))
    split = (None if env.assignment_mode == AssignmentMode.SHARED
             else nearest_drone_assignment(scenario, range(scenario.n_drones)))
    mdp = discretize(scenario, split, env)
    trained = train(mdp, method, train_config, env.jal_action_budget)
    rollout = greedy_rollout(mdp, trained)

    output_dir = output_dir or default_output_dir()
    _write(output_dir, f'{scenario.name}_{method.value}_learning_curve.csv',
           converter.learning_curve_frame(trained.history))
    _write(output_dir, f'{scenario.name}_{method.value}_policy_path.csv',
           converter.policy_path_frame(rollout))
    click.echo(f'{method.value}: {len(rollout.delivered)}/{mdp.n_buildings} building(s) '
               f'delivered in {rollout.n_steps} step(s), return {rollout.episode_return:.3f}, '
               f'cost (artifact scale) {rollout_cost(mdp, rollout):.3f}')
    return 0


@cli.command()
@_scenario_source
@click.option('--methods', default='mpc,iql,jal,vdn', show_default=True,
              help='Comma separated methods.')
@click.option('--seeds', default='0', show_default=True, help='Comma separated seeds.')
@click.option('--episodes', type=int, default=None, show_default='1000',
              help='Training episodes of the learners.')
@click.option('--max-iters', type=int, default=None, show_default='20000',
              help='Iteration cap of the optimizer.')
@click.option('--lambda-fleet', type=float, default=None, show_default='scenario lambda',
              help='Penalty per drone used.')
@click.option('--workers', type=int, default=None, show_default='1',
              help='Rows computed in parallel.')
@click.option('--format', 'report_format', default='text', show_default=True,
              help='Report printed on stdout: text or csv.')
@_outputs
def compare(scenario_id, file_path, methods, seeds, episodes, max_iters, lambda_fleet, workers,
            report_format, config_path, output_dir):
    """ Run every method with every seed and report the comparison. """
    scenario = _load_scenario(scenario_id, file_path)
    methods = _checked(methods, validate_methods, '--methods')
    report_format = _checked(report_format, validate_report_format, '--format')
    try:
        seeds = parse_int_list(seeds)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint='--seeds')
    if not seeds:
        raise click.BadParameter('at least one seed is required', param_hint='--seeds')
    bundle = _load_bundle(config_path)
    bundle = _set(bundle, lambda_fleet=lambda_fleet, workers=workers,
                  train=_set(bundle.train, episodes=episodes),
                  optimizer=_set(bundle.optimizer, max_iterations=max_iters))
    report = run_comparison(scenario, methods, seeds, bundle)

    output_dir = output_dir or default_output_dir()
    for fmt, extension in ((ReportFormat.CSV, 'csv'), (ReportFormat.TEXT, 'txt')):
        path = File(os.path.join(output_dir, f'{scenario.name}_report.{extension}')).write_text(
            emit_report(report, fmt))
        click.echo(f'wrote {path}')
    click.echo(emit_report(report, report_format), nl=False)
    return 0


@cli.command()
@click.option('--report', 'report_path', type=click.Path(exists=True, dir_okay=False),
              required=True, help='Report csv written by compare.')
@click.option('--format', 'report_format', default='text', show_default=True,
              help='text or csv.')
@click.option('--output-dir', default=None, show_default='print only',
              help='Also write the rendered report here.')
def emit(report_path, report_format, output_dir):
    """ Re-render a stored comparison report. """
    report_format = _checked(report_format, validate_report_format, '--format')
    try:
        report = load_report(File(report_path).read_text())
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint='--report')
    document = emit_report(report, report_format)
    if output_dir is not None:
        extension = 'csv' if report_format == ReportFormat.CSV else 'txt'
        path = File(os.path.join(output_dir, f'{report.scenario}_report.{extension}')).write_text(
            document)
        logger.info('wrote %s', path)
    click.echo(document, nl=False)
    return 0


def main(argv=None):
    """ Run the command line and return its exit code. """
    try:
        ret = cli.main(args=argv, prog_name='drone-delivery', standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except ScenarioError as e:
        click.echo(f'error: {e}', err=True)
        return 1
    except DroneDeliveryError as e:
        click.echo(f'error: {e}', err=True)
        return 2
    except ValueError as e:
        # invalid configuration values
        click.echo(f'error: {e}', err=True)
        return 1
    return ret if isinstance(ret, int) else 0


def run():
    sys.exit(main())

