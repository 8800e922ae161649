"""
TDM toolchain - parser, checker, configurator and release generator.

This package reads models written in the TDM textual variability language,
validates them, enumerates and completes their configurations, and derives
release manifests from configuration specs.
"""

__version__ = "0.1.0"
__author__ = "TDM Toolchain Development Team"
