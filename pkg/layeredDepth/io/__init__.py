"""Module containing file input and output: logging, run configurations, stack directories and LDI containers.
"""

import layeredDepth.io.logger
import layeredDepth.io.config_parser
import layeredDepth.io.config_writer
