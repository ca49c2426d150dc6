"""JSON persistence for fitted mixtures.

Floats are written with Python's shortest round-trip repr, so
``load(save(model))`` reproduces every parameter bit for bit.
"""

import json

import numpy as np

from .datasets import Scaling
from .distribution import MBParams
from .mixture import MixtureModel

FORMAT_VERSION = 1


class ModelFileError(ValueError):
    pass


def to_dict(model, report=None, scaling=None, feature_names=None):
    doc = {
        "format_version": FORMAT_VERSION,
        "M": model.dim,
        "C": model.n_components,
        "weights": [float(w) for w in model.weights],
        "components": [{"a": [float(v) for v in c.a], "b": float(c.b)}
                       for c in model.components],
    }
    if report is not None:
        doc["fit_report"] = {
            "trace": [float(v) for v in report.log_likelihood_trace],
            "expected_trace": [float(v) for v in report.expected_ll_trace],
            "n_iter": int(report.n_iter),
            "converged": bool(report.converged),
            "seed": int(report.seed),
            "best_init_index": int(report.best_init_index),
        }
    if scaling is not None:
        doc["scaling"] = scaling.to_dict()
    if feature_names is not None:
        doc["feature_names"] = list(feature_names)
    return doc


def from_dict(doc):
    """Return ``(model, scaling_or_None, doc)``."""
    try:
        if doc["format_version"] != FORMAT_VERSION:
            raise ModelFileError(f"unsupported format_version {doc['format_version']}")
        comps = [MBParams(np.asarray(c["a"], dtype=float), float(c["b"]))
                 for c in doc["components"]]
        model = MixtureModel(np.asarray(doc["weights"], dtype=float), comps)
    except (KeyError, TypeError) as exc:
        raise ModelFileError(f"malformed model file: {exc}") from exc
    if model.dim != doc.get("M", model.dim) or model.n_components != doc.get("C", len(comps)):
        raise ModelFileError("M/C header does not match the stored components")
    scaling = Scaling.from_dict(doc["scaling"]) if "scaling" in doc else None
    return model, scaling, doc


def dumps(model, report=None, scaling=None, feature_names=None):
    return json.dumps(to_dict(model, report, scaling, feature_names), indent=1) + "\n"


def save(path, model, report=None, scaling=None, feature_names=None):
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(model, report, scaling, feature_names))


def load(path):
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except OSError as exc:
        raise ModelFileError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path} is not valid JSON: {exc}") from exc
    return from_dict(doc)
