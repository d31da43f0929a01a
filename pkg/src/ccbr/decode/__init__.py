"""Kinematic decoders: CCBR and the Wiener baselines."""

from .cascade import CCBRConfig, CCBRModel, Reduction, ccbr_fit, ccbr_fit_split, ccbr_predict, fit_reduction
from .io import decoder_from_dict, decoder_to_dict, dumps, loads
from .metrics import r_squared
from .quantize import QuantizerModel, quantizer_decode_expect, quantizer_encode, quantizer_fit
from .wiener import WienerModel, wiener_cascade_fit, wiener_fit, wiener_normal_residual, wiener_predict

__all__ = [
    "CCBRConfig",
    "CCBRModel",
    "QuantizerModel",
    "Reduction",
    "WienerModel",
    "ccbr_fit",
    "ccbr_fit_split",
    "ccbr_predict",
    "decoder_from_dict",
    "decoder_to_dict",
    "dumps",
    "fit_reduction",
    "loads",
    "quantizer_decode_expect",
    "quantizer_encode",
    "quantizer_fit",
    "r_squared",
    "wiener_cascade_fit",
    "wiener_fit",
    "wiener_normal_residual",
    "wiener_predict",
]
