"""Class that is responsible for writing run configurations and JSON records

Converts data model objects back into text files. Output never contains timestamps and keeps a
fixed key order, so writing the same objects twice gives byte-identical files.
"""


import os
import json

import numpy as np

from layeredDepth.io import logger as LOG


RUN_CONFIG_FILE = 'run_config.json'


def _to_builtin(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError('Cannot serialize {} to JSON'.format(type(value).__name__))


def dumps_json(data):
    """Function that serializes a record with stable formatting

    Returns
    -------
    str
        JSON text, four space indent, trailing newline
    """

    return json.dumps(data, indent=4, default=_to_builtin) + '\n'


def write_json(data, path):
    """Function that writes a record to a JSON file

    Parameters
    ----------
    data : dict
        record with a fixed key order
    path : str
        output file path
    """

    with open(path, 'w', newline='\n') as json_file:
        json_file.write(dumps_json(data))


class ConfigWriter:
    """Class that is responsible for writing the effective configuration of a run

    Attributes
    ----------
    run_config : RunConfig
        run config to write
    """

    def __init__(self, run_config):
        """Constructor for ConfigWriter object
        """

        self.run_config = run_config


    def write_run_config(self, filepath):
        """Function that saves the run configuration next to a run's outputs

        Parameters
        ----------
        filepath : str
            output directory of the run

        Returns
        -------
        bool
            True if successful, False otherwise
        str
            None if successful, otherwise an error message
        """

        try:
            os.makedirs(filepath, exist_ok=True)
            target = os.path.join(filepath, RUN_CONFIG_FILE)
            write_json(self.run_config.to_dict(), target)
        except OSError as e:
            return False, 'Could not write run configuration to {}: {}'.format(filepath, str(e))
        LOG.debug('Wrote effective configuration to {}'.format(target))
        return True, None
