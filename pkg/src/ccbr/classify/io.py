"""Versioned JSON serialization of classifier models."""

import json

from ..errors import SchemaError
from .base import SCHEMA_VERSION
from .centroid import CentroidModel
from .linear import LinearProbModel
from .subset import SubsetModel
from .tree import TreeModel
from .window import WindowModel

_KINDS = {
    "linear": LinearProbModel,
    "centroid": CentroidModel,
    "window": WindowModel,
    "tree": TreeModel,
    "subset": SubsetModel,
}


def model_from_dict(d):
    if d.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported classifier schema_version {d.get('schema_version')!r}")
    try:
        cls = _KINDS[d["kind"]]
    except KeyError:
        raise SchemaError(f"unknown classifier kind {d.get('kind')!r}") from None
    return cls.from_dict(d)


def dumps(model):
    return json.dumps(model.to_dict())


def loads(text):
    return model_from_dict(json.loads(text))
