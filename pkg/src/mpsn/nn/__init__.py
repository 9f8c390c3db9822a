from .layers import (FlowLayer, FlowOperators, GNNLayer, MPSNLayer, Readout, SCNNLayer, SINLayer,
                     flow_layer, gnn_layer, message_count, mpsn_layer, readout, scnn_layer,
                     scnn_polynomial, shared_weights, sin_layer, spectral_message_passing)
from .models import FLOW_MODELS, SIN, FlowClassifier, lifted_features
from .structure import BoundaryStack
from .symmetry import OrientationFlip, SimplexPermutation, apply_flip, apply_permutation
from .training import ArrayDataset, TrainConfig, TrainingDiverged, TrainResult, train

__all__ = [
    "FlowLayer", "FlowOperators", "GNNLayer", "MPSNLayer", "Readout", "SCNNLayer", "SINLayer",
    "flow_layer", "gnn_layer", "message_count", "mpsn_layer", "readout", "scnn_layer",
    "scnn_polynomial", "shared_weights", "sin_layer", "spectral_message_passing",
    "FLOW_MODELS", "SIN", "FlowClassifier", "lifted_features", "BoundaryStack",
    "OrientationFlip", "SimplexPermutation", "apply_flip", "apply_permutation",
    "ArrayDataset", "TrainConfig", "TrainingDiverged", "TrainResult", "train",
]
