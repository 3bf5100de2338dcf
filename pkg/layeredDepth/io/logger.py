"""Module containing logging functions.

The logger is controlled via a set of global variables set by the layeredDepth client.

The client assigns a write function taking a single string, ex. sys.stdout.write, and may open a
log file per run. Besides plain messages the logger records the run header (command, seed, thread
count, output), the files a command writes and the time spent in every pipeline stage.
Nothing written through the logger ends up in dataset files.
"""

import os
import time
import datetime
import contextlib


def get_date_as_string():
    """Helper function that gets a string representation of the current date and time

    Returns
    -------
    str
        String representing current date
    """

    now = datetime.datetime.now()
    date_time = now.strftime('%m-%d-%Y_%H-%M-%S')
    return str(date_time)


# Global variable storing function for logging. Function must accept a single string parameter
_WRITE_FUNCTION = None

# Global variable representing the log file for the current run of layeredDepth
_LOG_FILE = None

# Global variable representing whether or not to print per-kernel statistics
_PRINT_KERNELS = False

# Global variable to determine whether or not to print debug messages
_DEBUG = False

# Seconds spent per pipeline stage, and number of times it ran, since the last reset
_STAGE_TIMES = {}
_STAGE_COUNTS = {}


def log_file_name(command=None):
    """Function that names the log file of a run

    Returns
    -------
    str
        layeredDepth_<command>_<date>.log, the command part left out if None
    """

    parts = ['layeredDepth'] + ([command] if command else []) + [get_date_as_string()]
    return '{}.log'.format('_'.join(parts))


def initialize_logger(command=None, log_dir='logs'):
    """Function for initializing log-file writing in addition to stdout output

    Parameters
    ----------
    command=None : str
        subcommand of the run, part of the file name
    log_dir='logs' : str
        directory in which the log file is created

    Returns
    -------
    str
        path of the log file, None if it could not be opened
    """

    global _LOG_FILE
    path = os.path.join(log_dir, log_file_name(command))
    try:
        os.makedirs(log_dir, exist_ok=True)
        _LOG_FILE = open(path, 'w')
    except OSError:
        write('Failed to initialize log file {}...'.format(path))
        return None
    return path


def close_logger():
    """Function that closes the opened logfile
    """

    global _LOG_FILE
    if _LOG_FILE is not None:
        _LOG_FILE.close()
        _LOG_FILE = None


def toggle_kernel_printing():
    """Function that toggles printing per-kernel statistics
    """

    global _PRINT_KERNELS
    _PRINT_KERNELS = not _PRINT_KERNELS


def toggle_debug_logging():
    """Function that toggles printing additional debug messages
    """

    global _DEBUG
    _DEBUG = not _DEBUG


def assign_write_function(write_function):
    """Function that assigns a default write function for the logger

    Parameters
    ----------
    write_function : function(str)
        A function that takes a single string parameter. Ex. print()
    """

    global _WRITE_FUNCTION
    _WRITE_FUNCTION = write_function


def debug(text, force_no_timestamp=False):
    """Function used for writing debug messages.

    By default debug messages will have a timestamp, unless force_no_timestamp flag is set

    Parameters
    ----------
    text : str
        debug text to print
    force_no_timestamp=False : bool
        a flag to disable timestamp printing when required
    """

    if _DEBUG:
        write(text, no_timestamp=force_no_timestamp)


def print_kernel(text):
    """Function for printing kernel statistics, ex. splat counts or ray cast timings

    Parameters
    ----------
    text : str
        statistics line to print
    """

    if _PRINT_KERNELS:
        write(text, no_timestamp=True)


def run_header(command, seed, threads, out=None):
    """Function that records what a run does

    The header always goes to the log file, so a saved log names the seed needed to replay it.
    It is printed only with debug messages on.

    Parameters
    ----------
    command : str
        subcommand
    seed : int
        global seed
    threads : int
        worker threads
    out=None : str
        output directory
    """

    text = 'Running {} with seed {} on {} thread(s), output {}'.format(command, seed, threads, out or '-')
    if _DEBUG:
        write(text)
    else:
        log_write('{}\n'.format(text))


def output(description, path):
    """Function that records a file or directory written by a command

    Parameters
    ----------
    description : str
        what was written, ex. 'scene stack'
    path : str
        where it was written
    """

    if _DEBUG:
        write('Wrote {} to {}'.format(description, path))
    else:
        log_write('Wrote {} to {}\n'.format(description, path))


@contextlib.contextmanager
def stage(name):
    """Context manager that times one pipeline stage

    The time is added to the stage total even if the stage raises. With kernel printing on, every
    run of the stage is printed.

    Parameters
    ----------
    name : str
        stage name, ex. 'ray cast' or 'synthesize'
    """

    start = time.perf_counter()
    try:
        yield
    finally:
        elapsed = time.perf_counter() - start
        _STAGE_TIMES[name] = _STAGE_TIMES.get(name, 0.0) + elapsed
        _STAGE_COUNTS[name] = _STAGE_COUNTS.get(name, 0) + 1
        print_kernel('{}: {:.3f} s'.format(name, elapsed))


def stage_timings():
    """Function that reports accumulated stage times

    Returns
    -------
    dict of str -> (float, int)
        total seconds and run count per stage
    """

    return {name: (_STAGE_TIMES[name], _STAGE_COUNTS[name]) for name in _STAGE_TIMES}


def reset_stage_timings():
    _STAGE_TIMES.clear()
    _STAGE_COUNTS.clear()


def write_stage_summary():
    """Function that writes one debug line per timed stage, slowest first
    """

    ordered = sorted(stage_timings().items(), key=lambda item: (-item[1][0], item[0]))
    for name, (seconds, count) in ordered:
        debug('{:<16} {:8.3f} s over {} run(s)'.format(name, seconds, count), force_no_timestamp=True)


def write(text, no_timestamp=True):
    """Main logging funcion. Called if write function was set

    Parameters
    ----------
    text : str
        text to print
    no_timestamp=True : bool
        a flag to disable timestamp printing when required
    """

    if not _DEBUG or no_timestamp:
        final_text = '{}\n'.format(text)
    else:
        final_text = '{} - {}\n'.format(datetime.datetime.now(), text)

    log_write(final_text)

    if _WRITE_FUNCTION is not None:
        _WRITE_FUNCTION(final_text)


def log_write(text):
    """Function that writes text to the log file, if one was initialized

    Parameters
    ----------
    text : str
        text to save
    """

    if _LOG_FILE is not None:
        _LOG_FILE.write(text)
