import json
import os

from ..exception import RunConfigException
from .dict import RunConfigDict


class RunConfigJsonFile(RunConfigDict):
    _config_file: str

    def __init__(self, config_file: str):
        """
        config_file contains one JSON document in the format accepted by
        RunConfigDict. Parse errors are reported with line and column.
        """
        if not os.path.isfile(config_file):
            raise RunConfigException("Run config file not found: " + config_file)
        self._config_file = config_file

        with open(config_file, encoding="utf-8") as cfg:
            try:
                data = json.loads(cfg.read())
            except json.JSONDecodeError as e:
                raise RunConfigException(
                    f"Invalid JSON in {config_file} at line {e.lineno}, column {e.colno}: {e.msg}"
                ) from e
        super().__init__(data)

    def get_config_file(self) -> str:
        return self._config_file
