"""Benchmark harness comparing MPC with the tabular learners.

Every (method, seed) pair produces one RunMetrics row: the number of drones the method
ends up using, its minimum total cost and the wall time of the whole run. Costs of the
learners are on the artifact scale (see `rollout_cost`) and are not comparable with the MPC
objective in absolute value.
"""
import io
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from statistics import median
from typing import List, Optional

import pandas as pd

from src.marl.grid_mdp import MarlEnvConfig, discretize
from src.marl.q_learning import TrainConfig
from src.marl.trainers import greedy_rollout, rollout_cost, train
from src.mpc.fleet import make_evaluator, nearest_drone_assignment, plan_fleet
from src.mpc.optimizer import OptimizerConfig
from src.utils.enumerators import AssignmentMode, EvaluatorType, Method, ReportFormat
from src.utils.errors import MethodRunError
from src.utils.general_utils import host_description
from src.utils.read_files import File
from src.utils.validations import is_yaml

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ['scenario', 'method', 'seed', 'optimal_drones', 'min_total_cost',
                  'wall_time_seconds', 'converged', 'host']
METRIC_LABELS = ['Optimal number of drones', 'Minimum total cost (artifact scale)',
                 'Time to convergence (s)']
BUNDLE_SECTIONS = ('optimizer', 'train', 'env', 'bench')


@dataclass
class BenchConfig:
    """Everything a comparison needs besides the scenario.

    Attributes:
        optimizer (OptimizerConfig): MPC gradient descent settings
        train (TrainConfig): learner settings
        env (MarlEnvConfig): grid-world rewards and task split
        lambda_fleet (float): fleet penalty; None uses the scenario lambda
        evaluator (EvaluatorType): per-drone cost used by the fleet selection
        reach_weight (float): weight of the flight distance in the final-state evaluator
        workers (int): rows computed in parallel (1 = sequential)
    """
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    env: MarlEnvConfig = field(default_factory=MarlEnvConfig)
    lambda_fleet: Optional[float] = None
    evaluator: EvaluatorType = EvaluatorType.FINAL_STATE
    reach_weight: float = 1.0
    workers: int = 1

    def __post_init__(self):
        self.evaluator = EvaluatorType(self.evaluator)
        if self.lambda_fleet is not None and self.lambda_fleet < 0:
            raise ValueError(f'lambda_fleet must be non-negative, got {self.lambda_fleet}')
        if int(self.workers) < 1:
            raise ValueError(f'workers must be positive, got {self.workers}')

    def with_seed(self, seed):
        """Copy of the bundle whose optimizer and learner use `seed`."""
        return replace(self,
                       optimizer=replace(self.optimizer, seed=seed),
                       train=replace(self.train, seed=seed))

    @classmethod
    def from_dict(cls, data):
        """ Bundle from a mapping with the optional sections optimizer, train, env and bench.

        Unknown sections or keys raise ValueError.
        """
        data = data or {}
        unknown = set(data) - set(BUNDLE_SECTIONS)
        if unknown:
            raise ValueError(f'unknown config section(s): {", ".join(sorted(unknown))}')

        def build(section, klass, exclude=()):
            values = data.get(section) or {}
            if not isinstance(values, dict):
                raise ValueError(f'config section {section!r} must be a mapping')
            allowed = {f.name for f in fields(klass) if f.init} - set(exclude)
            bad = set(values) - allowed
            if bad:
                raise ValueError(f'unknown key(s) in {section!r}: {", ".join(sorted(bad))}')
            return values

        bench = build('bench', cls, exclude=('optimizer', 'train', 'env'))
        return cls(optimizer=OptimizerConfig(**build('optimizer', OptimizerConfig)),
                   train=TrainConfig(**build('train', TrainConfig)),
                   env=MarlEnvConfig(**build('env', MarlEnvConfig)),
                   **bench)

    @classmethod
    def from_yaml(cls, path):
        if not is_yaml(path):
            raise ValueError(f'config bundle must be a yaml file: {path}')
        return cls.from_dict(File(path).read())


@dataclass
class RunMetrics:
    """One benchmark row.

    Attributes:
        scenario (str): scenario name
        method (Method): method run
        seed (int): seed of the run
        optimal_drones (int): drones used (mpc: active fleet; learners: agents that delivered)
        min_total_cost (float): MPC objective, or the artifact-scale cost of a learner; NaN
            for a failed run
        wall_time_seconds (float): wall time of the whole run
        converged (bool): mpc: |delta J| < epsilon reached; learners: every building delivered
        host (str): machine the run took place on
        error (str): failure message of a failed row
    """
    scenario: str
    method: Method
    seed: int
    optimal_drones: int
    min_total_cost: float
    wall_time_seconds: float
    converged: bool
    host: str = ''
    error: Optional[str] = None

    @property
    def failed(self):
        return self.error is not None or math.isnan(self.min_total_cost)

    def as_row(self):
        return [self.scenario, self.method.value, self.seed, self.optimal_drones,
                self.min_total_cost, self.wall_time_seconds, self.converged, self.host]


@dataclass
class ComparisonReport:
    scenario: str
    rows: List[RunMetrics]

    @property
    def methods(self):
        present = {row.method for row in self.rows}
        return [m for m in Method if m in present]

    @property
    def host(self):
        return self.rows[0].host if self.rows else ''

    def aggregate(self):
        """ Per method median over the completed rows.

        Returns
        -------
        dict
            Method -> {'optimal_drones', 'min_total_cost', 'wall_time_seconds'}, or None for a
            method without a completed row.
        """
        ret = {}
        for method in self.methods:
            done = [row for row in self.rows if row.method == method and not row.failed]
            if not done:
                ret[method] = None
                continue
            ret[method] = {
                'optimal_drones': median(row.optimal_drones for row in done),
                'min_total_cost': median(row.min_total_cost for row in done),
                'wall_time_seconds': median(row.wall_time_seconds for row in done),
            }
        return ret

    def to_frame(self):
        return pd.DataFrame([row.as_row() for row in self.rows], columns=REPORT_COLUMNS)


def _marl_assignment(scenario, env_config):
    if env_config.assignment_mode == AssignmentMode.SHARED:
        return None
    return nearest_drone_assignment(scenario, range(scenario.n_drones))


def _run_mpc(scenario, config):
    evaluator = make_evaluator(config.evaluator, config.reach_weight)
    run = plan_fleet(scenario, config.optimizer, config.lambda_fleet, evaluator)
    return run.plan.n_active, run.total_cost, run.result.converged


def _run_marl(scenario, method, config):
    mdp = discretize(scenario, _marl_assignment(scenario, config.env), config.env)
    trained = train(mdp, method, config.train, config.env.jal_action_budget)
    rollout = greedy_rollout(mdp, trained)
    delivering = len(set(rollout.delivered_by.values()))
    return delivering, rollout_cost(mdp, rollout), rollout.terminal


def run_method(scenario, method, config=None, seed=0):
    """ Run one method on a scenario and measure it.

    Parameters
    ----------
    scenario : Scenario
    method : Method
    config : BenchConfig (optional)
    seed : int
        Overrides the seeds of the optimizer and learner configs.

    Returns
    -------
    RunMetrics

    Raises
    ------
    MethodRunError
        Any failure of the method, tagged with its name.
    """
    method = Method(method)
    config = (config or BenchConfig()).with_seed(seed)
    start = time.perf_counter()
    try:
        if method == Method.MPC:
            drones, cost, converged = _run_mpc(scenario, config)
        else:
            drones, cost, converged = _run_marl(scenario, method, config)
    except Exception as e:
        raise MethodRunError(method.value, e) from e
    elapsed = time.perf_counter() - start
    logger.info('%s %s seed %d: %d drone(s), cost %.4f, %.3f s', scenario.name, method.value,
                seed, drones, cost, elapsed)
    return RunMetrics(scenario=scenario.name,
                      method=method,
                      seed=int(seed),
                      optimal_drones=int(drones),
                      min_total_cost=float(cost),
                      wall_time_seconds=elapsed,
                      converged=bool(converged),
                      host=host_description())


def _run_row(scenario, method, seed, config):
    start = time.perf_counter()
    try:
        return run_method(scenario, method, config, seed)
    except MethodRunError as e:
        logger.warning('%s seed %d failed: %s', method.value, seed, e)
        return RunMetrics(scenario=scenario.name,
                          method=method,
                          seed=int(seed),
                          optimal_drones=0,
                          min_total_cost=math.nan,
                          wall_time_seconds=time.perf_counter() - start,
                          converged=False,
                          host=host_description(),
                          error=str(e))


def run_comparison(scenario, methods, seeds, config=None):
    """ Run every method with every seed.

    Parameters
    ----------
    scenario : Scenario
    methods : list of Method
    seeds : list of int
    config : BenchConfig (optional)
        `workers` > 1 computes the rows in a thread pool; the row order does not change.

    Returns
    -------
    ComparisonReport
        One row per (method, seed), in that order; failed runs are kept as failed rows.
    """
    methods = [Method(m) for m in methods]
    if len(methods) == 0:
        raise ValueError('run_comparison needs at least one method')
    if len(seeds) == 0:
        raise ValueError('run_comparison needs at least one seed')
    config = config or BenchConfig()
    jobs = [(method, seed) for method in methods for seed in seeds]
    logger.info('comparing %s on %s with seeds %s', ', '.join(m.value for m in methods),
                scenario.name, list(seeds))
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            rows = list(executor.map(lambda job: _run_row(scenario, job[0], job[1], config),
                                     jobs))
    else:
        rows = [_run_row(scenario, method, seed, config) for method, seed in jobs]
    return ComparisonReport(scenario=scenario.name, rows=rows)


def _format_value(value, label):
    if value is None:
        return 'failed'
    if label == METRIC_LABELS[0]:
        return f'{value:g}'
    return f'{value:.2f}'


def emit_report(report, report_format=ReportFormat.TEXT):
    """ Render a comparison.

    The text table has one row per metric and one column per method (MPC, IQL, JAL, VDN
    order), holding the medians over seeds. The csv has one line per RunMetrics with the
    columns of REPORT_COLUMNS.

    Returns
    -------
    str
    """
    report_format = ReportFormat(report_format)
    if report_format == ReportFormat.CSV:
        return report.to_frame().to_csv(index=False, lineterminator='\n')

    aggregate = report.aggregate()
    keys = ['optimal_drones', 'min_total_cost', 'wall_time_seconds']
    table = pd.DataFrame(
        {m.value.upper(): [_format_value(None if aggregate[m] is None else aggregate[m][k], label)
                           for k, label in zip(keys, METRIC_LABELS)]
         for m in report.methods},
        index=pd.Index(METRIC_LABELS, name='Metric'))
    seeds = sorted({row.seed for row in report.rows})
    lines = [f'Scenario: {report.scenario}',
             f'Seeds: {", ".join(str(s) for s in seeds)} (medians over completed runs)',
             f'Host: {report.host}',
             '',
             table.to_string()]
    failed = [row for row in report.rows if row.failed]
    if failed:
        lines.append('')
        lines.extend(f'failed: {row.method.value} seed {row.seed}: {row.error or "no cost"}'
                     for row in failed)
    return '\n'.join(lines) + '\n'


def load_report(text):
    """ ComparisonReport from the csv written by emit_report. """
    frame = pd.read_csv(io.StringIO(text), keep_default_na=False, na_values=[''],
                        float_precision='round_trip')
    missing = [c for c in REPORT_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f'report csv misses column(s): {", ".join(missing)}')
    if frame.empty:
        raise ValueError('report csv has no rows')
    rows = []
    for record in frame.to_dict('records'):
        cost = float(record['min_total_cost'])
        host = record['host']
        rows.append(RunMetrics(scenario=str(record['scenario']),
                               method=Method(record['method']),
                               seed=int(record['seed']),
                               optimal_drones=int(record['optimal_drones']),
                               min_total_cost=cost,
                               wall_time_seconds=float(record['wall_time_seconds']),
                               converged=str(record['converged']) == 'True',
                               host='' if isinstance(host, float) else str(host)))
    return ComparisonReport(scenario=rows[0].scenario, rows=rows)
