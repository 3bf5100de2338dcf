"""A python module for generating, composing, and re-rendering layered depth images.

layeredDepth builds object-wise layered decompositions of procedural indoor scenes, merges them
into layered depth images, and uses those for view synthesis, object removal and evaluation.
Its primary client is layeredCLI.
"""

import sys
import os
import datetime
import subprocess
from sys import platform
import layeredDepth.io.logger as LOG


if platform == 'win32':
    OS_class = 'windows-x64'
else:
    try:
        # External package used to identify linux distribution version. Note that this adds external
        # dependancy, but it is required because the platform.linuxdistro() function is being deprecated
        import distro
        OS_class = '{}_{}'.format(distro.id(), distro.version())
    except ImportError:
        OS_class = 'linux'


# Module version, author, copyright
__version__     = "R1-0"
__author__      = "layeredDepth developers"
__copyright__   = "Copyright (c) layeredDepth developers 2026"
__environment__ = "Python Version: {}, OS Class: {}".format(sys.version.split()[0], OS_class)


def find_version():
    """Function that attempts to get the version of layeredDepth used.

    Returns
    -------
    version : str
        The version string for layeredDepth. Either hardcoded version, or git tag description
    commit_hash : str
        None if git status not available, otherwise hash of current commit.
    """

    version = __version__
    commit_hash = None

    try:
        with open(os.devnull, 'w') as FNULL:
            out = subprocess.check_output(['git', 'describe', '--tags'], stderr=FNULL)
            version = out.decode('utf-8').strip()
            out = subprocess.check_output(['git', 'rev-parse', 'HEAD'], stderr=FNULL)
            commit_hash = out.decode('utf-8').strip()
    except (OSError, subprocess.CalledProcessError):
        LOG.debug('Running from non-git version of layeredDepth, default to internal version number.')

    LOG.debug('Found layeredDepth version: {}'.format(version))
    return version, commit_hash


def get_debug_version_info():
    """Function that retrieves printable debug string about current layeredDepth version

    Returns
    -------
    debug_info : str
        A string with debug information about layeredDepth
    """

    version, _ = find_version()
    return 'layeredDepth: {}, {}, Date: {}\n'.format(version, __environment__, datetime.datetime.now())


def get_welcome_text():
    """Function that returns a welcome message with some layeredDepth information

    Returns
    -------
    str
        the welcome message
    """

    text = "+----------------------------------------------------------------+\n"
    text = text + "+ ldi-tool, Version: {:<44}+\n".format(__version__)
    text = text + "+ {:<63}+\n".format(__environment__[:63])
    text = text + "+ {:<63}+\n".format(__copyright__)
    text = text + "+ This software comes with NO warranty!                          +\n"
    text = text + "+----------------------------------------------------------------+\n"
    return text


def join_path(*args):
    """Function that joins paths.

    All paths use / instead of \\ so that manifests are identical across platforms.
    """

    output_path = ''
    first = True
    for arg in args:
        temp = str(arg).strip()
        temp = temp.replace('\\', '/')
        if temp.endswith('/'):
            temp = temp[:-1]
        if first:
            first = False
        else:
            output_path += '/'
        output_path += temp

    return output_path
