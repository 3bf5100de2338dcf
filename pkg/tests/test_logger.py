"""
Unit test file for the layeredDepth logger
"""

__author__      = "layeredDepth developers"
__copyright__   = "Copyright (c) layeredDepth developers 2026"


import os

import pytest

import layeredDepth.io.logger as LOG


def capture(monkeypatch, debug=False, kernels=False):
    lines = []
    monkeypatch.setattr(LOG, '_WRITE_FUNCTION', lines.append)
    monkeypatch.setattr(LOG, '_DEBUG', debug)
    monkeypatch.setattr(LOG, '_PRINT_KERNELS', kernels)
    monkeypatch.setattr(LOG, '_LOG_FILE', None)
    monkeypatch.setattr(LOG, '_STAGE_TIMES', {})
    monkeypatch.setattr(LOG, '_STAGE_COUNTS', {})
    return lines


def test_log_file_name():
    name = LOG.log_file_name('gen')
    assert name.startswith('layeredDepth_gen_')
    assert name.endswith('.log')
    assert LOG.log_file_name().count('_') == LOG.log_file_name('gen').count('_') - 1


def test_stage_accumulates(monkeypatch):
    lines = capture(monkeypatch, kernels=True)
    for _ in range(2):
        with LOG.stage('ray cast'):
            pass
    seconds, count = LOG.stage_timings()['ray cast']
    assert count == 2
    assert seconds >= 0.0
    assert len(lines) == 2
    assert lines[0].startswith('ray cast: ')

    LOG.reset_stage_timings()
    assert LOG.stage_timings() == {}


def test_stage_timed_when_raising(monkeypatch):
    capture(monkeypatch)
    with pytest.raises(ValueError):
        with LOG.stage('synthesize'):
            raise ValueError('bad pose')
    assert LOG.stage_timings()['synthesize'][1] == 1


def test_stage_summary_slowest_first(monkeypatch):
    lines = capture(monkeypatch, debug=True)
    LOG._STAGE_TIMES.update({'write stack': 0.5, 'ray cast': 2.0})
    LOG._STAGE_COUNTS.update({'write stack': 1, 'ray cast': 3})
    LOG.write_stage_summary()
    assert len(lines) == 2
    assert lines[0].startswith('ray cast')
    assert '3 run(s)' in lines[0]
    assert lines[1].startswith('write stack')


def test_stage_summary_quiet_without_debug(monkeypatch):
    lines = capture(monkeypatch)
    with LOG.stage('evaluate'):
        pass
    LOG.write_stage_summary()
    assert lines == []


def test_quiet_run_goes_to_log_file(monkeypatch, tmp_path):
    lines = capture(monkeypatch)
    path = LOG.initialize_logger('gen', str(tmp_path / 'logs'))
    try:
        LOG.run_header('gen', 3, 2, 'out')
        LOG.output('stack with 2 instances', 'out/scene_0000')
    finally:
        LOG.close_logger()
    assert lines == []
    assert os.path.basename(path).startswith('layeredDepth_gen_')
    with open(path, 'r') as log_file:
        text = log_file.read()
    assert 'Running gen with seed 3 on 2 thread(s), output out\n' in text
    assert 'Wrote stack with 2 instances to out/scene_0000\n' in text


def test_debug_run_printed(monkeypatch):
    lines = capture(monkeypatch, debug=True)
    LOG.run_header('eval', 0, 1)
    LOG.output('report', 'report.json')
    assert lines[0].endswith('output -\n')
    assert lines[1].endswith('Wrote report to report.json\n')


def test_log_file_failure(monkeypatch, tmp_path):
    lines = capture(monkeypatch)
    blocker = tmp_path / 'blocker'
    blocker.write_text('')
    assert LOG.initialize_logger('gen', str(blocker)) is None
    assert 'Failed to initialize log file' in lines[0]
