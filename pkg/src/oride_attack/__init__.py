"""Location harvesting against ORide-style ride hailing, and its mitigation."""
from .attack import AttackReport, PredictionSet, RideSnapshot, predict_driver, run_attack, run_attack_pnorm
from .geometry import (
    InvalidExponent,
    LatticeOffset,
    LatticeSolutionSet,
    ParameterTooLarge,
    embed_pnorm_into_circle,
    enumerate_circle,
    enumerate_pnorm,
)
from .projection import GeoPoint, PlanarPoint, project, unproject
from .roadnet import RoadNetwork, RoadSegment, Zone, build, generate_manhattan_grid, ingest

__version__ = "0.1.0"
