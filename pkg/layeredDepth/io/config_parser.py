"""Class that parses run configuration files

The purpose of this class is given a configuration file path as input, to output a RunConfig
object. JSON files are always accepted, YAML files when pyyaml is installed.
"""


import os
import json

import layeredDepth.data_model.run_config as RC
from layeredDepth.errors import ConfigError
from layeredDepth.io import logger as LOG

WITH_YAML = True
try:
    import yaml
except ImportError:
    # User does not have pyyaml installed, so only JSON configurations can be read
    WITH_YAML = False

# Mappings replaced as a whole instead of merged key by key
REPLACED_WHOLE = ('class_table',)


class ConfigParser:
    """Class responsible for parsing a configuration file into a RunConfig object

    Attributes
    ----------
    config_path : str
        path to the configuration file
    """

    def __init__(self, config_path):
        """Constructor for ConfigParser
        """

        self.config_path = config_path


    def check_valid_config_path(self):
        """Function that checks if the configuration path points to a readable file

        Returns
        -------
        bool
            True if the file exists, False otherwise
        """

        return os.path.exists(self.config_path) and os.path.isfile(self.config_path)


    def read_config_dict(self):
        """Function that loads the raw key/value content of the configuration file

        Returns
        -------
        dict
            parsed content, or None
        str
            None if there is no error, or a message describing the error
        """

        if not self.check_valid_config_path():
            return None, 'Configuration file {} not found'.format(self.config_path)

        is_yaml = self.config_path.endswith(('.yml', '.yaml'))
        if is_yaml and not WITH_YAML:
            return None, 'Reading {} requires pyyaml, which is not installed'.format(self.config_path)
        try:
            with open(self.config_path, 'r') as config_file:
                data = yaml.safe_load(config_file) if is_yaml else json.load(config_file)
        except (ValueError, OSError) as e:
            return None, 'Could not read {}: {}'.format(self.config_path, str(e))
        except Exception as e:
            # yaml.YAMLError does not share a base class we can import without pyyaml
            return None, 'Could not parse {}: {}'.format(self.config_path, str(e))
        if not isinstance(data, dict):
            return None, 'Configuration file {} must hold a mapping'.format(self.config_path)
        LOG.debug('Read configuration keys {} from {}'.format(sorted(data), self.config_path))
        return data, None


    def parse_run_config(self, overrides=None):
        """Top level configuration parser function

        Parameters
        ----------
        overrides : dict
            defaults to None. values applied on top of the file content

        Returns
        -------
        RunConfig
            valid run config if parsing was successful, or None
        str
            None if there is no error, or a message describing the error
        """

        data, message = self.read_config_dict()
        if data is None:
            return None, message
        return build_run_config(data, overrides)


def merge_config(base, overrides):
    """Function that overlays a nested override mapping onto a base mapping

    Returns
    -------
    dict
        merged copy, override values win, None overrides are ignored
    """

    merged = dict(base)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(merged.get(key), dict) and key not in REPLACED_WHOLE:
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = value
    return merged


def build_run_config(data=None, overrides=None):
    """Function that builds a RunConfig from defaults, file content and overrides

    Returns
    -------
    RunConfig
        effective configuration, or None
    str
        None if there is no error, or a message describing the error
    """

    merged = merge_config(RC.RunConfig().to_dict(), data)
    merged = merge_config(merged, overrides)
    try:
        return RC.RunConfig.from_dict(merged), None
    except ConfigError as e:
        return None, str(e)
    except (TypeError, ValueError, AttributeError) as e:
        return None, 'Invalid configuration value: {}'.format(str(e))
