from enum import Enum


class StepRule(str, Enum):
    SIGNED_GRAD = "signed_grad"
    RAW_GRAD = "raw_grad"


class InitPolicy(str, Enum):
    ZERO = "zero"
    UNIFORM_RANDOM = "uniform_random"


class AttackKind(str, Enum):
    FGSM = "fgsm"
    PGD = "pgd"
    BIM = "bim"
