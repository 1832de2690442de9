"""Littlewood-Paley square functions on a sampled circle, with weights,
auxiliary decomposition operators and a correction heuristic."""
from .circle import FreqInterval, Partition, SampledFunction, Spectrum, to_spectrum, from_spectrum
from .errors import LPError
from .multipliers import FunctionSequence, square_function, op_T, op_T_u, op_P_u, theorem2_ratio
from .weights import Weight, catalog

__all__ = [
    "FreqInterval", "Partition", "SampledFunction", "Spectrum", "to_spectrum", "from_spectrum",
    "LPError", "FunctionSequence", "square_function", "op_T", "op_T_u", "op_P_u",
    "theorem2_ratio", "Weight", "catalog",
]
__version__ = "0.1.0"
