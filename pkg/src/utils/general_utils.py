import logging
import math
import os
import platform

from dotenv import find_dotenv, load_dotenv

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
OUTPUT_DIR_ENV = 'DRONE_DELIVERY_OUTPUT_DIR'
DEFAULT_OUTPUT_DIR = 'results'


def setup_logging(verbose=False):
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)


def default_output_dir():
    """ Output directory taken from the environment (a .env file is honoured).

    Returns
    -------
    str
        Value of DRONE_DELIVERY_OUTPUT_DIR, or 'results' when it is not set.
    """
    # find .env by walking up directories until it's found
    load_dotenv(find_dotenv(usecwd=True))
    return os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR)


def round_half_up(value):
    # round() would send 0.5 to 0 and 2.5 to 2
    return int(math.floor(value + 0.5))


def to_cell(position):
    """ Convert a planar position (x, y) into its grid cell (col, row). """
    return (round_half_up(position[0]), round_half_up(position[1]))


def host_description():
    return f'{platform.platform()} / python {platform.python_version()}'


def format_point(point):
    return '({:g}, {:g})'.format(float(point[0]), float(point[1]))


def parse_int_list(text):
    """ Parse a comma separated list of integers (e.g. '0,1,2'). """
    if text is None or text.strip() == '':
        return []
    try:
        return [int(item) for item in text.split(',') if item.strip() != '']
    except ValueError:
        raise ValueError(f'invalid integer list: {text!r}')
