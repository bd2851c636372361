import importlib.util
import sys

REQUIRED_PYTHON = (3, 9)
REQUIRED_PACKAGES = ['numpy', 'pandas', 'click', 'dotenv', 'yaml']


def main():
    if sys.version_info[:2] < REQUIRED_PYTHON:
        raise TypeError(
            "This project requires Python {}.{} or newer. Found: Python {}".format(
                *REQUIRED_PYTHON, sys.version))
    missing = [name for name in REQUIRED_PACKAGES if importlib.util.find_spec(name) is None]
    if missing:
        raise ImportError(
            "Missing packages: {} (pip install -r requirements.txt)".format(", ".join(missing)))
    print(">>> Development environment passes all tests!")


if __name__ == '__main__':
    main()
