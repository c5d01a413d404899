from models.parameter import Parameter
from models.layers import Layer, Linear, Conv2d, ReLU, MaxPool2d, Flatten
from models.sequential import Model, same_parameters

__all__ = ["Parameter", "Layer", "Linear", "Conv2d", "ReLU", "MaxPool2d", "Flatten", "Model", "same_parameters"]
