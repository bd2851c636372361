# -*- coding: utf-8 -*-
import click
import logging
import os
from pathlib import Path
from dotenv import find_dotenv, load_dotenv

from src.data.builtin_scenarios import builtin_ids, builtin_scenario
from src.utils.converter import write_scenario
from src.utils.general_utils import LOG_FORMAT


def make_dataset(output_dir, scenario_ids=None):
    """ Write the builtin scenarios as json files `<id>.json` into `output_dir`.

    Returns
    -------
    list
        Paths written.
    """
    paths = []
    for scenario_id in scenario_ids or builtin_ids():
        scenario = builtin_scenario(scenario_id)
        paths.append(write_scenario(scenario, os.path.join(output_dir, f'{scenario_id}.json')))
    return paths


@click.command()
@click.argument('output_dirpath', type=click.Path(file_okay=False), required=False)
def main(output_dirpath):
    """ Writes the builtin scenarios (env1, env2) as scenario files, by default into
        data/scenarios.
    """
    logger = logging.getLogger(__name__)
    if output_dirpath is None:
        output_dirpath = str(project_dir / 'data' / 'scenarios')
    for path in make_dataset(output_dirpath):
        logger.info('wrote %s', path)


project_dir = Path(__file__).resolve().parents[2]

if __name__ == '__main__':
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)

    # find .env automagically by walking up directories until it's found, then
    # load up the .env entries as environment variables
    load_dotenv(find_dotenv())

    main()
