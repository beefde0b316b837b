"""Single-document JSON persistence for trained models.

The file bundles the cluster bank, transition tables, feature scaling,
configuration, and both baselines; writing is deterministic, so retraining
with identical seeds reproduces the file byte for byte.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .baselines import LinearActivityClassifier
from .gmm import GaussianCluster, Standardizer, SubActivityBank
from .hog import CameraIntrinsics
from .memm import TransitionTables
from .pipeline import RunConfig, TrainedModel

FORMAT_VERSION = 1


def _lists(a: np.ndarray) -> list:
    return np.asarray(a, dtype=float).tolist()


def model_to_dict(model: TrainedModel) -> dict:
    cfg = model.config
    return {
        "format_version": FORMAT_VERSION,
        "config": {
            "location": cfg.location,
            "use_hog_simple": cfg.use_hog_simple,
            "use_hog_skeletal": cfg.use_hog_skeletal,
            "substructure_cap": cfg.substructure_cap,
            "seed": cfg.seed,
            "self_prob": cfg.self_prob,
            "to_neutral": cfg.to_neutral,
            "neutral_stay": cfg.neutral_stay,
            "smoothing": cfg.smoothing,
            "boundary_prior": cfg.boundary_prior,
            "incremental": cfg.incremental,
            "intrinsics": {
                "fx": cfg.intrinsics.fx,
                "fy": cfg.intrinsics.fy,
                "cx": cfg.intrinsics.cx,
                "cy": cfg.intrinsics.cy,
                "width": cfg.intrinsics.width,
                "height": cfg.intrinsics.height,
            },
        },
        "standardization": {
            "mean": _lists(model.standardizer.mean),
            "scale": _lists(model.standardizer.scale),
        },
        "bank": {
            "location": model.bank.location,
            "activities": list(model.bank.activities),
            "clusters": [
                {
                    "mean": _lists(c.mean),
                    "variances": _lists(c.variances),
                    "weight": c.weight,
                    "origin_activity": c.origin_activity,
                }
                for c in model.bank.clusters
            ],
        },
        "tables": {
            "activities": list(model.tables.activities),
            "sub_trans": _lists(model.tables.sub_trans),
            "neutral_trans": _lists(model.tables.neutral_trans),
            "act_trans": _lists(model.tables.act_trans),
            "sub_prior": _lists(model.tables.sub_prior),
        },
        "baselines": {
            "naive": {
                "classes": list(model.naive.classes),
                "weights": _lists(model.naive.weights),
                "biases": _lists(model.naive.biases),
                "platt_a": _lists(model.naive.platt_a),
                "platt_b": _lists(model.naive.platt_b),
            },
            "one_level": {"act_trans": _lists(model.one_level_trans)},
        },
    }


def model_from_dict(doc: dict) -> TrainedModel:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {version!r}")
    c = doc["config"]
    config = RunConfig(
        location=c["location"],
        use_hog_simple=c["use_hog_simple"],
        use_hog_skeletal=c["use_hog_skeletal"],
        substructure_cap=c["substructure_cap"],
        seed=c["seed"],
        self_prob=c["self_prob"],
        to_neutral=c["to_neutral"],
        neutral_stay=c["neutral_stay"],
        smoothing=c["smoothing"],
        boundary_prior=c["boundary_prior"],
        incremental=c["incremental"],
        intrinsics=CameraIntrinsics(**c["intrinsics"]),
    )
    standardizer = Standardizer(
        mean=np.asarray(doc["standardization"]["mean"]),
        scale=np.asarray(doc["standardization"]["scale"]),
    )
    bank_doc = doc["bank"]
    bank = SubActivityBank(
        location=bank_doc["location"],
        clusters=tuple(
            GaussianCluster(
                mean=np.asarray(c["mean"]),
                variances=np.asarray(c["variances"]),
                weight=c["weight"],
                origin_activity=c["origin_activity"],
            )
            for c in bank_doc["clusters"]
        ),
        standardizer=standardizer,
        activities=tuple(bank_doc["activities"]),
    )
    tables_doc = doc["tables"]
    tables = TransitionTables(
        activities=tuple(tables_doc["activities"]),
        sub_trans=np.asarray(tables_doc["sub_trans"]),
        neutral_trans=np.asarray(tables_doc["neutral_trans"]),
        act_trans=np.asarray(tables_doc["act_trans"]),
        sub_prior=np.asarray(tables_doc["sub_prior"]),
    )
    naive_doc = doc["baselines"]["naive"]
    naive = LinearActivityClassifier(
        classes=tuple(naive_doc["classes"]),
        weights=np.asarray(naive_doc["weights"]),
        biases=np.asarray(naive_doc["biases"]),
        platt_a=np.asarray(naive_doc["platt_a"]),
        platt_b=np.asarray(naive_doc["platt_b"]),
    )
    return TrainedModel(
        config=config,
        bank=bank,
        tables=tables,
        naive=naive,
        one_level_trans=np.asarray(doc["baselines"]["one_level"]["act_trans"]),
    )


def save_model(model: TrainedModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_model(path: str | Path) -> TrainedModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
