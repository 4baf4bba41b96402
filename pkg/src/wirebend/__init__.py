"""wirebend: design-to-fabrication toolkit for 3D wirebent wireframes.

Pipeline: wireframe graph -> Euler path -> feed/bend/rotate instructions ->
material/kinematic error compensation -> simulation and time estimation ->
machine control (real serial port or conformant emulator).
"""

__version__ = "0.1.0"
