"""Neural motor decoding with cascaded classification-based regression."""

from ._accel import USE_NUMBA, backend_name
from .data import FoldSplit, NeuralDataset, SynthConfig, generate_synthetic, load_dataset, make_folds
from .decode import CCBRConfig, ccbr_fit, ccbr_predict, r_squared, wiener_cascade_fit, wiener_fit, wiener_predict

__version__ = "0.1.0"

__all__ = [
    "CCBRConfig",
    "FoldSplit",
    "NeuralDataset",
    "SynthConfig",
    "USE_NUMBA",
    "backend_name",
    "ccbr_fit",
    "ccbr_predict",
    "generate_synthetic",
    "load_dataset",
    "make_folds",
    "r_squared",
    "wiener_cascade_fit",
    "wiener_fit",
    "wiener_predict",
]
