"""Module containing the internal data representation for rasters, layer stacks, LDIs, scenes and configurations.
"""

import layeredDepth.data_model.raster
import layeredDepth.data_model.layer_stack
import layeredDepth.data_model.ldi
import layeredDepth.data_model.scene_spec
import layeredDepth.data_model.run_config
