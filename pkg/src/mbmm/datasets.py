"""Dataset container, unit-interval scaling, synthetic generators and CSV I/O."""

import csv
from dataclasses import dataclass, field, replace

import numpy as np

#: scaled features are clamped into [SCALE_EPS, 1 - SCALE_EPS]
SCALE_EPS = 1e-6

GENERATOR_DEFAULTS = {
    "blobs": {"n_per_cluster": 500, "means": [[-6.0, 0.0], [0.0, 6.0], [6.0, 0.0]],
              "stds": [1.0, 1.0, 1.0]},
    "unequal_variance": {"n_per_cluster": 500,
                         "means": [[-6.0, 0.0], [0.0, 6.0], [6.0, 0.0]],
                         "stds": [1.0, 1.0, 4.0]},
    "anisotropic": {"n_per_cluster": 500, "means": [[-6.0, 0.0], [0.0, 6.0], [6.0, 0.0]],
                    "correlation": 0.9, "scale": 1.5},
    "circles": {"n_per_cluster": 500, "outer_radius": 1.0, "inner_radius": 0.45,
                "noise": 0.04},
}


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class Scaling:
    minimum: np.ndarray
    maximum: np.ndarray
    eps: float = SCALE_EPS

    def apply(self, raw):
        raw = np.asarray(raw, dtype=float)
        if raw.ndim != 2 or raw.shape[1] != self.minimum.size:
            raise DataError(f"data has {np.shape(raw)[-1]} features, scaling expects "
                            f"{self.minimum.size}")
        # affine onto [eps, 1 - eps] so that rescaling scaled data is a no-op;
        # the clip only matters for new data outside the training range
        x = (raw - self.minimum) / (self.maximum - self.minimum)
        return np.clip(self.eps + (1.0 - 2.0 * self.eps) * x, self.eps, 1.0 - self.eps)

    def to_dict(self):
        return {"min": self.minimum.tolist(), "max": self.maximum.tolist(), "eps": self.eps}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["min"], dtype=float), np.asarray(d["max"], dtype=float),
                   float(d.get("eps", SCALE_EPS)))


@dataclass(frozen=True)
class Dataset:
    points: np.ndarray
    labels: np.ndarray = None
    feature_names: list = None
    scaling: Scaling = None
    raw: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise DataError("points must be an (N, M) matrix")
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (pts.shape[0],):
                raise DataError(f"{labels.size} labels for {pts.shape[0]} points")
            object.__setattr__(self, "labels", labels)
        if self.feature_names is not None and len(self.feature_names) != pts.shape[1]:
            raise DataError("one feature name per column required")

    @property
    def n_samples(self):
        return self.points.shape[0]

    @property
    def n_features(self):
        return self.points.shape[1]


def fit_scaling(raw, feature_names=None):
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 2 or raw.shape[0] < 2:
        raise DataError("need an (N, M) matrix with N >= 2 to scale")
    lo, hi = raw.min(axis=0), raw.max(axis=0)
    flat = np.flatnonzero(~(hi > lo))
    if flat.size:
        k = int(flat[0])
        name = feature_names[k] if feature_names else f"#{k}"
        raise DataError(f"feature {name} is constant and cannot be scaled")
    return Scaling(lo, hi)


def scale_unit(raw, labels=None, feature_names=None):
    """Min-max scale every feature onto ``[SCALE_EPS, 1 - SCALE_EPS]``.

    ``raw`` may also be a :class:`Dataset`, whose labels and names carry over.
    """
    if isinstance(raw, Dataset):
        labels = raw.labels if labels is None else labels
        feature_names = raw.feature_names if feature_names is None else feature_names
        raw = raw.points
    raw = np.asarray(raw, dtype=float)
    scaling = fit_scaling(raw, feature_names)
    return Dataset(scaling.apply(raw), labels, feature_names, scaling, raw)


def _config(name, overrides):
    cfg = {**GENERATOR_DEFAULTS[name]}
    unknown = set(overrides or {}) - set(cfg)
    if unknown:
        raise DataError(f"unknown {name} settings: {sorted(unknown)}")
    cfg.update(overrides or {})
    return cfg


def _gaussians(rng, n, means, covs):
    parts = [rng.multivariate_normal(m, cov, size=n) for m, cov in zip(means, covs)]
    labels = np.repeat(np.arange(len(parts)), n)
    return np.vstack(parts), labels


def make_blobs(seed=0, **overrides):
    """Three isotropic, well separated 2-D Gaussians (500 points each)."""
    cfg = _config("blobs", overrides)
    rng = np.random.default_rng(seed)
    covs = [s * s * np.eye(2) for s in cfg["stds"]]
    raw, labels = _gaussians(rng, cfg["n_per_cluster"], cfg["means"], covs)
    return scale_unit(raw, labels, ["x1", "x2"])


def make_unequal_variance(seed=0, **overrides):
    """Like :func:`make_blobs` but the third Gaussian is four times wider."""
    cfg = _config("unequal_variance", overrides)
    rng = np.random.default_rng(seed)
    covs = [s * s * np.eye(2) for s in cfg["stds"]]
    raw, labels = _gaussians(rng, cfg["n_per_cluster"], cfg["means"], covs)
    return scale_unit(raw, labels, ["x1", "x2"])


def make_anisotropic(seed=0, **overrides):
    cfg = _config("anisotropic", overrides)
    rng = np.random.default_rng(seed)
    r = cfg["correlation"]
    cov = cfg["scale"] * np.array([[1.0, r], [r, 1.0]])
    raw, labels = _gaussians(rng, cfg["n_per_cluster"], cfg["means"], [cov] * len(cfg["means"]))
    return scale_unit(raw, labels, ["x1", "x2"])


def make_circles(seed=0, **overrides):
    """Two noisy concentric circles; label 0 is the outer one."""
    cfg = _config("circles", overrides)
    rng = np.random.default_rng(seed)
    n = cfg["n_per_cluster"]
    parts = []
    for radius in (cfg["outer_radius"], cfg["inner_radius"]):
        t = rng.uniform(0.0, 2.0 * np.pi, n)
        ring = radius * np.column_stack([np.cos(t), np.sin(t)])
        parts.append(ring + rng.normal(0.0, cfg["noise"], size=(n, 2)))
    raw = np.vstack(parts)
    return scale_unit(raw, np.repeat([0, 1], n), ["x1", "x2"])


GENERATORS = {
    "blobs": make_blobs,
    "unequal_variance": make_unequal_variance,
    "anisotropic": make_anisotropic,
    "circles": make_circles,
}


def generate(name, seed=0, **overrides):
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise DataError(f"unknown dataset {name!r}; choose from {', '.join(GENERATORS)}") from None
    return gen(seed, **overrides)


def _encode_labels(values):
    try:
        return np.array([int(v) for v in values])
    except ValueError:
        pass
    try:
        as_float = np.array([float(v) for v in values])
        if np.all(as_float == np.round(as_float)):
            return as_float.astype(int)
    except ValueError:
        pass
    # categorical labels (e.g. "M"/"B") become codes in sorted order
    _, codes = np.unique(np.asarray(values), return_inverse=True)
    return codes


def load_csv(path, label_column=None, drop_columns=()):
    """Read a headed CSV into an unscaled :class:`Dataset`.

    Every column other than ``label_column`` and ``drop_columns`` must be
    numeric.
    """
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not rows:
        raise DataError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r and any(c.strip() for c in r)]
    missing = [c for c in drop_columns if c not in header]
    if missing:
        raise DataError(f"columns to drop not found: {missing}")
    if label_column is not None and label_column not in header:
        raise DataError(f"label column {label_column!r} not in header {header}")
    keep = [k for k, h in enumerate(header) if h != label_column and h not in drop_columns]
    if not keep:
        raise DataError("no feature columns left")
    points = np.empty((len(body), len(keep)))
    labels = [] if label_column is not None else None
    label_idx = header.index(label_column) if label_column is not None else None
    for i, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(f"{path}:{i}: expected {len(header)} fields, got {len(row)}")
        for j, k in enumerate(keep):
            try:
                points[i - 2, j] = float(row[k])
            except ValueError:
                raise DataError(f"{path}:{i}: non-numeric value {row[k]!r} in column "
                                f"{header[k]!r}") from None
        if labels is not None:
            labels.append(row[label_idx].strip())
    if labels is not None:
        labels = _encode_labels(labels)
    return Dataset(points, labels, [header[k] for k in keep])


def read_labels(path, column=None):
    """Labels from one column of a headed CSV (``label`` or else the first)."""
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not rows or not rows[0]:
        raise DataError(f"{path} has no header")
    header = [h.strip() for h in rows[0]]
    if column is None:
        column = "label" if "label" in header else header[0]
    if column not in header:
        raise DataError(f"label column {column!r} not in header {header}")
    k = header.index(column)
    values = []
    for i, row in enumerate(rows[1:], start=2):
        if not row or not any(c.strip() for c in row):
            continue
        if len(row) <= k:
            raise DataError(f"{path}:{i}: missing {column!r} field")
        values.append(row[k].strip())
    return _encode_labels(values)


def write_csv(path, dataset, label_column="label"):
    names = dataset.feature_names or [f"x{k + 1}" for k in range(dataset.n_features)]
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(names + ([label_column] if dataset.labels is not None else []))
        for k, row in enumerate(dataset.points):
            cells = [repr(float(v)) for v in row]
            if dataset.labels is not None:
                cells.append(str(dataset.labels[k]))
            w.writerow(cells)


def with_labels(dataset, labels):
    return replace(dataset, labels=np.asarray(labels))
