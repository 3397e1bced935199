"""Pulse-level simulation and analysis of single-loop holonomic gates.

Subpackages cover the full experiment loop: drive construction (pulses,
holonomic), device and noise models (model), integrators (evolution),
process tomography (tomography), randomized benchmarking (benchmarking),
calibration fits (calibration), and robustness sweeps (sweeps). The cli
module exposes all of it as `holosim <subcommand>`.
"""

__version__ = "0.1.0"
