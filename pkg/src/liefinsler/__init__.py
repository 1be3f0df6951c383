"""Symbolic–numeric verification of Finsler geometry on Lie algebroids.

Scenarios describe an anchored bracket structure (anchor ρ and structure
functions L), optionally a Finsler energy F, a semispray, a horizontal
endomorphism and a linear connection.  The package builds the prolongation,
horizontal endomorphisms, d-connections, Finsler objects and Ichijyō/Wagner
machinery from these data and checks the identities relating them at seeded
sample points.
"""

from .algebroid import LieAlgebroid
from .checks import run
from .finsler import FinslerStructure
from .horizontal import HorizontalEndo
from .ichijyo import LinearConnectionE
from .scenario import Scenario, ScenarioError, load_fixture, load_scenario, loads

__version__ = "1.0.0"

__all__ = [
    "FinslerStructure",
    "HorizontalEndo",
    "LieAlgebroid",
    "LinearConnectionE",
    "Scenario",
    "ScenarioError",
    "load_fixture",
    "load_scenario",
    "loads",
    "run",
]
