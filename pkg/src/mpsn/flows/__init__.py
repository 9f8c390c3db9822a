from .benchmark import (DEFAULT_HOLES, FlowDataset, FlowSample, GenerationError, PlanarComplex,
                        complex_from_points, corner_vertices, generate_complex, generate_dataset,
                        generate_trajectories, random_walk, randomize_test_orientations, walk_to_flow)
from .delaunay import DegenerateError, bowyer_watson

__all__ = [
    "DEFAULT_HOLES", "FlowDataset", "FlowSample", "GenerationError", "PlanarComplex",
    "complex_from_points", "corner_vertices", "generate_complex", "generate_dataset",
    "generate_trajectories", "random_walk", "randomize_test_orientations", "walk_to_flow",
    "DegenerateError", "bowyer_watson",
]
