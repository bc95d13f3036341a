"""Feedforward computational graphs: generators, mixing time and minimax fidelity."""
from .errors import (BackwardEdge, FFGraphError, InsufficientData, InvalidDegree, OutOfRange,
                     ParseError, PreconditionFailed, SizeLimit, ZeroInDegree, ZeroOutDegree)
from .generators import GeneratorConfig, default_indegree, generate
from .graph import FeedforwardGraph, ValidationReport, build_graph, deserialize, serialize, validate
from .metrics import (FidelityReport, MixingReport, averaged_mixing_time, fidelity_report,
                      path_count, tau_row_diffusion, tau_row_walk, walk_spectrum)

__all__ = [
    "BackwardEdge", "FFGraphError", "InsufficientData", "InvalidDegree", "OutOfRange", "ParseError",
    "PreconditionFailed", "SizeLimit", "ZeroInDegree", "ZeroOutDegree",
    "GeneratorConfig", "default_indegree", "generate",
    "FeedforwardGraph", "ValidationReport", "build_graph", "deserialize", "serialize", "validate",
    "FidelityReport", "MixingReport", "averaged_mixing_time", "fidelity_report", "path_count",
    "tau_row_diffusion", "tau_row_walk", "walk_spectrum",
]
__version__ = "0.1.0"
