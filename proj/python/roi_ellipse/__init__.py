"""Click-seeded breast-tumour ROI ellipses from keypoint classification."""

import json as _json

from . import _core
from ._core import (
    ConfigError,
    DataError,
    derive_seed,
    dice,
    fuzzy_hyperbolize,
    load_image,
    median3,
    preprocess,
    save_image,
    write_phantoms,
)

__all__ = [
    "ConfigError",
    "DataError",
    "derive_seed",
    "detect",
    "dice",
    "evaluate",
    "fit_ellipse",
    "fuzzy_hyperbolize",
    "generate_phantom",
    "load_image",
    "median3",
    "preprocess",
    "rasterize",
    "save_image",
    "segment",
    "train",
    "write_phantoms",
]


def _config(config):
    return _json.dumps(config) if config else ""


def detect(image, features="surf", config=None):
    """Preprocess and detect. Returns (keypoints, descriptors)."""
    return _core.detect(image, features, _config(config))


def generate_phantom(seed, contrast=60.0, width=256, height=256):
    """Returns (image, mask, lesion) where lesion is {cx, cy, rx, ry}."""
    image, mask, lesion = _core.generate_phantom(seed, contrast, width, height)
    return image, mask, _json.loads(lesion)


def fit_ellipse(points):
    return _json.loads(_core.fit_ellipse(points))


def rasterize(ellipse, width, height):
    return _core.rasterize(_json.dumps(ellipse), width, height)


def segment(image, cx, cy, features="surf", classifier="kmeans", model_path=None, seed=42, config=None):
    return _json.loads(_core.segment(image, cx, cy, features, classifier, model_path or "", seed, _config(config)))


def train(data, features, out, seed=42, config=None):
    _core.train(str(data), features, str(out), seed, _config(config))


def evaluate(data, features=("surf",), classifiers=("svm",), seed=42, workers=1, config=None):
    return _json.loads(_core.evaluate(str(data), list(features), list(classifiers), seed, workers, _config(config)))
