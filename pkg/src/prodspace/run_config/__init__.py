# flake8: noqa
from .abstract import SUITE_NAMES, RunConfigAbstract
from .dict import RunConfigDict
from .json_file import RunConfigJsonFile
