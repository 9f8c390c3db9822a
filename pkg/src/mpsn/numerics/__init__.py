from .autodiff import Tensor, UnsupportedOpError, backward
from .linalg import DEFAULT_EPS_REL, kron, rank_with_tolerance, unvec, vec
from .optim import SGD, Adam, StepSchedule

__all__ = [
    "Tensor", "UnsupportedOpError", "backward", "DEFAULT_EPS_REL", "kron",
    "rank_with_tolerance", "unvec", "vec", "SGD", "Adam", "StepSchedule",
]
