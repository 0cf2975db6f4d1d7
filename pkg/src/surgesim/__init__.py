"""Surface-code lattice-surgery simulator.

Simulates logical memory, joint-ZZ measurement, and lattice-surgery CNOT
protocols on rotated surface-code patches under phenomenological noise,
decodes with exact minimum-weight perfect matching, and classifies logical
errors by the boundary components their error strings terminate on.
"""

__version__ = "0.1.0"
