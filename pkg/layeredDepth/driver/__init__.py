"""Module containing drivers for the core layered depth operations

This module contains drivers for scene generation, composition, losses, rendering and evaluation. These drivers are
then called by the command line client.
"""
