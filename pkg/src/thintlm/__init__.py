"""2D TLM solver with thin curved panels embedded between mesh nodes."""

__version__ = "0.1.0"

from .analysis import find_resonances, relative_difference, shielding_effectiveness, spectrum
from .geometry import CrossingSet, Ellipse, MeshSpec, Naca4, Polyline, apply_gap, compute_crossings
from .mesh import BoundaryKind, Mesh, NodeKind, run
from .panel import PEC, FilmMaterial, StackGeometry, build_bank, cfc_film, stack_admittance, step_crossing
from .sources import DeltaPoint, Gaussian, GaussianModulated, Impulse, PlaneWaveLine, Probe
