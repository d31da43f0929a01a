"""JSON round trip for fitted decoders."""

import json

from ..errors import SchemaError
from .cascade import CCBRModel
from .wiener import WienerModel


def decoder_to_dict(model):
    if isinstance(model, list):
        return {"schema_version": 1, "kind": "ccbr_set", "models": [m.to_dict() for m in model]}
    return model.to_dict()


def decoder_from_dict(d):
    kind = d.get("kind")
    if d.get("schema_version") != 1:
        raise SchemaError(f"unsupported decoder schema_version {d.get('schema_version')!r}")
    if kind == "ccbr_set":
        models = [CCBRModel.from_dict(m) for m in d["models"]]
        # dimensions fitted together share one reduction
        for m in models[1:]:
            m.reduction = models[0].reduction
        return models
    if kind == "ccbr":
        return CCBRModel.from_dict(d)
    if kind in ("wiener", "wiener_cascade"):
        return WienerModel.from_dict(d)
    raise SchemaError(f"unknown decoder kind {kind!r}")


def dumps(model):
    return json.dumps(decoder_to_dict(model))


def loads(text):
    return decoder_from_dict(json.loads(text))
