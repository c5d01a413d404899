from enum import Enum


class OptimizerKind(str, Enum):
    SGD = "sgd"
    SGD_MOMENTUM = "sgd_momentum"
