"""Online human activity detection from skeleton streams.

A two-layer hierarchical maximum-entropy Markov model labels each frame of
a 15-joint skeleton stream with a high-level activity, segmenting the past
into activity substructures by dynamic programming. Mid-level states come
from per-location Gaussian-mixture cluster banks over 459 skeletal features
(optionally extended with HOG image descriptors).
"""

from .baselines import (
    LinearActivityClassifier,
    NaiveFrameClassifier,
    OneLevelMemmClassifier,
    one_level_step,
    platt_calibrate,
    train_naive,
)
from .evaluate import (
    ConfusionMatrix,
    MetricsReport,
    score,
    split_have_seen,
    split_new_person,
)
from .features import (
    FeatureVector,
    SkeletalFeatureExtractor,
    body_pose_features,
    hand_features,
    motion_features,
    sequence_features,
)
from .gmm import (
    GaussianCluster,
    Standardizer,
    SubActivityBank,
    build_bank,
    fit_gmm,
    posterior,
    soft_labels,
)
from .hog import (
    BoundingBox,
    CameraIntrinsics,
    hog_descriptor,
    simple_hog,
    skeletal_bboxes,
    skeletal_hog,
)
from .memm import (
    NEUTRAL,
    DetectorState,
    HierarchicalActivityDetector,
    TransitionTables,
    detect_stream,
    estimate_transitions,
    init_state,
    neutral_transition,
    structure_step,
    substructure_score,
)
from .model_io import load_model, save_model
from .pipeline import (
    RunConfig,
    TrainedModel,
    detect_with_model,
    evaluate_dataset,
    featurize,
    train_location_model,
)
from .quaternions import (
    quaternion_to_rotation,
    rotation_to_halfspace_quaternion,
)
from .skeleton import (
    RANDOM,
    JointRecord,
    LabeledSequence,
    SkeletonFrame,
    load_dataset,
    mirror_sequence,
    parse_frame,
    serialize_frame,
)
from .synth import MotionScript, build_benchmark_dataset, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "CameraIntrinsics",
    "ConfusionMatrix",
    "DetectorState",
    "FeatureVector",
    "GaussianCluster",
    "HierarchicalActivityDetector",
    "JointRecord",
    "LabeledSequence",
    "LinearActivityClassifier",
    "MetricsReport",
    "MotionScript",
    "NEUTRAL",
    "NaiveFrameClassifier",
    "OneLevelMemmClassifier",
    "RANDOM",
    "RunConfig",
    "SkeletalFeatureExtractor",
    "SkeletonFrame",
    "Standardizer",
    "SubActivityBank",
    "TrainedModel",
    "TransitionTables",
    "body_pose_features",
    "build_bank",
    "build_benchmark_dataset",
    "detect_stream",
    "detect_with_model",
    "estimate_transitions",
    "evaluate_dataset",
    "featurize",
    "fit_gmm",
    "generate_synthetic",
    "hand_features",
    "hog_descriptor",
    "init_state",
    "load_dataset",
    "load_model",
    "mirror_sequence",
    "motion_features",
    "neutral_transition",
    "one_level_step",
    "parse_frame",
    "platt_calibrate",
    "posterior",
    "quaternion_to_rotation",
    "rotation_to_halfspace_quaternion",
    "save_model",
    "score",
    "sequence_features",
    "serialize_frame",
    "simple_hog",
    "skeletal_bboxes",
    "skeletal_hog",
    "soft_labels",
    "split_have_seen",
    "split_new_person",
    "structure_step",
    "substructure_score",
    "train_location_model",
    "train_naive",
]
