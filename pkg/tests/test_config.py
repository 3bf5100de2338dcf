"""
Unit test file for run configuration parsing and writing
"""

__author__      = "layeredDepth developers"
__copyright__   = "Copyright (c) layeredDepth developers 2026"


import os
import json

import pytest

import layeredDepth.io.config_parser as PARSER
import layeredDepth.io.config_writer as WRITER
from layeredDepth.data_model.run_config import RunConfig


default_path = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'configure', 'default_config.json')


def write_config(tmp_path, data, name='config.json'):
    path = os.path.join(str(tmp_path), name)
    with open(path, 'w') as config_file:
        json.dump(data, config_file)
    return path


def test_default_config_matches_defaults():
    run_config, message = PARSER.ConfigParser(default_path).parse_run_config()
    assert message is None
    assert run_config.to_dict() == RunConfig().to_dict()


def test_missing_file():
    run_config, message = PARSER.ConfigParser('/nonexistent/config.json').parse_run_config()
    assert run_config is None
    assert 'not found' in message


def test_unknown_key(tmp_path):
    run_config, message = PARSER.ConfigParser(write_config(tmp_path, {'sed': 3})).parse_run_config()
    assert run_config is None
    assert 'sed' in message


def test_unknown_nested_key(tmp_path):
    run_config, message = PARSER.ConfigParser(write_config(tmp_path, {'warp': {'passes': 3}})).parse_run_config()
    assert run_config is None
    assert message is not None


def test_invalid_value(tmp_path):
    run_config, message = PARSER.ConfigParser(write_config(tmp_path, {'alpha_min': 2.0})).parse_run_config()
    assert run_config is None
    assert 'alpha_min' in message


def test_not_a_mapping(tmp_path):
    run_config, message = PARSER.ConfigParser(write_config(tmp_path, [1, 2])).parse_run_config()
    assert run_config is None


def test_nested_values_merge(tmp_path):
    path = write_config(tmp_path, {'seed': 5, 'generation': {'width': 64}})
    run_config, _ = PARSER.ConfigParser(path).parse_run_config()
    assert run_config.seed == 5
    assert run_config.generation.width == 64
    assert run_config.generation.height == 256


def test_class_table_replaced_whole(tmp_path):
    table = {'0': 'floor', '1': 'ceiling', '2': 'wall', '3': 'plant'}
    run_config, message = PARSER.ConfigParser(write_config(tmp_path, {'generation': {'class_table': table}})).parse_run_config()
    assert message is None
    assert run_config.generation.class_table == {0: 'floor', 1: 'ceiling', 2: 'wall', 3: 'plant'}
    assert run_config.generation.object_classes() == [3]


def test_overrides_win(tmp_path):
    path = write_config(tmp_path, {'seed': 5, 'count': 2, 'generation': {'width': 64}})
    overrides = {'seed': 9, 'count': None, 'generation': {'height': 32}}
    run_config, _ = PARSER.ConfigParser(path).parse_run_config(overrides)
    assert run_config.seed == 9
    assert run_config.count == 2
    assert (run_config.generation.width, run_config.generation.height) == (64, 32)


def test_build_without_file():
    run_config, message = PARSER.build_run_config(overrides={'command': 'gen', 'threads': 2})
    assert message is None
    assert run_config.command == 'gen'
    assert run_config.threads == 2


def test_yaml_config(tmp_path):
    pytest.importorskip('yaml')
    path = os.path.join(str(tmp_path), 'config.yml')
    with open(path, 'w') as config_file:
        config_file.write('seed: 12\nwarp:\n  max_fill_passes: 4\n')
    run_config, message = PARSER.ConfigParser(path).parse_run_config()
    assert message is None
    assert run_config.seed == 12
    assert run_config.warp.max_fill_passes == 4


def test_written_config_parses_back(tmp_path):
    run_config, _ = PARSER.build_run_config(overrides={'command': 'synth', 'pose': '0,0,0.1,0,0,0', 'frames': 3})
    written, message = WRITER.ConfigWriter(run_config).write_run_config(str(tmp_path))
    assert written and message is None
    path = os.path.join(str(tmp_path), WRITER.RUN_CONFIG_FILE)
    parsed, _ = PARSER.ConfigParser(path).parse_run_config()
    assert parsed.to_dict() == run_config.to_dict()


def test_dumps_json_is_stable():
    assert WRITER.dumps_json({'b': 1, 'a': [1.5]}) == '{\n    "b": 1,\n    "a": [\n        1.5\n    ]\n}\n'


def test_depth_gate_and_hidden_objects(tmp_path):
    path = write_config(tmp_path, {'warp': {'depth_gate': 0.1}, 'generation': {'keep_hidden': True}})
    run_config, message = PARSER.ConfigParser(path).parse_run_config()
    assert message is None
    assert run_config.warp.depth_gate == 0.1
    assert run_config.generation.keep_hidden
    assert not RunConfig().generation.keep_hidden


def test_negative_depth_gate(tmp_path):
    run_config, message = PARSER.ConfigParser(write_config(tmp_path, {'warp': {'depth_gate': -0.1}})).parse_run_config()
    assert run_config is None
    assert 'non-negative' in message
