"""Scripted synthetic skeleton sequences for tests and the desk-scale benchmark.

A MotionScript holds a base pose plus per-joint keyframe offsets over a
cycle; generation interpolates the keyframes, adds Gaussian position jitter,
and derives joint rotations from limb direction vectors so every frame
carries valid orientation data.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import EmptyScriptError
from .skeleton import (
    HEAD,
    LEFT_ELBOW,
    LEFT_FOOT,
    LEFT_HAND,
    LEFT_HIP,
    LEFT_KNEE,
    LEFT_SHOULDER,
    NECK,
    NUM_JOINTS,
    NUM_ORIENTED,
    RANDOM,
    RIGHT_ELBOW,
    RIGHT_FOOT,
    RIGHT_HAND,
    RIGHT_HIP,
    RIGHT_KNEE,
    RIGHT_SHOULDER,
    TORSO,
    WORLD_UP,
    LabeledSequence,
    SkeletonFrame,
)

# Neutral standing pose ~2.5 m from the sensor, millimeters, y up.
# Arms hang slightly flared so limb directions stay away from vertical.
BASE_POSE: dict[int, tuple[float, float, float]] = {
    HEAD: (0.0, 650.0, 2500.0),
    NECK: (0.0, 450.0, 2500.0),
    TORSO: (0.0, 200.0, 2500.0),
    LEFT_SHOULDER: (-180.0, 430.0, 2500.0),
    LEFT_ELBOW: (-260.0, 160.0, 2490.0),
    RIGHT_SHOULDER: (180.0, 430.0, 2500.0),
    RIGHT_ELBOW: (260.0, 160.0, 2490.0),
    LEFT_HIP: (-90.0, -20.0, 2500.0),
    LEFT_KNEE: (-95.0, -420.0, 2500.0),
    RIGHT_HIP: (90.0, -20.0, 2500.0),
    RIGHT_KNEE: (95.0, -420.0, 2500.0),
    LEFT_HAND: (-320.0, -80.0, 2470.0),
    RIGHT_HAND: (320.0, -80.0, 2470.0),
    LEFT_FOOT: (-100.0, -800.0, 2500.0),
    RIGHT_FOOT: (100.0, -800.0, 2500.0),
}

# parent -> child bone used to orient each of the 11 oriented joints
_BONES = {
    HEAD: (NECK, HEAD),
    NECK: (TORSO, NECK),
    TORSO: (TORSO, NECK),
    LEFT_SHOULDER: (LEFT_SHOULDER, LEFT_ELBOW),
    LEFT_ELBOW: (LEFT_ELBOW, LEFT_HAND),
    RIGHT_SHOULDER: (RIGHT_SHOULDER, RIGHT_ELBOW),
    RIGHT_ELBOW: (RIGHT_ELBOW, RIGHT_HAND),
    LEFT_HIP: (LEFT_HIP, LEFT_KNEE),
    LEFT_KNEE: (LEFT_KNEE, LEFT_FOOT),
    RIGHT_HIP: (RIGHT_HIP, RIGHT_KNEE),
    RIGHT_KNEE: (RIGHT_KNEE, RIGHT_FOOT),
}

_Z_AXIS = np.array([0.0, 0.0, 1.0])

Keyframes = dict[int, tuple[tuple[float, tuple[float, float, float]], ...]]


@dataclass(frozen=True)
class MotionScript:
    """Per-joint keyframe offsets (mm) over a repeating cycle.

    ``keyframes[joint]`` maps cycle phase in [0, 1) to an offset from the
    base pose; offsets are linearly interpolated and wrap around the cycle.
    """

    name: str
    activity: str
    location: str
    duration_frames: int = 150
    cycle_frames: int = 60
    jitter_mm: float = 0.0
    scale: float = 1.0
    tempo: float = 1.0
    keyframes: Keyframes = field(default_factory=dict)
    base_pose: dict[int, tuple[float, float, float]] = field(
        default_factory=lambda: dict(BASE_POSE)
    )


def _limb_rotation(direction: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(direction)
    if norm < 1e-9:
        return np.eye(3)
    d = direction / norm
    ref = WORLD_UP if abs(float(d @ WORLD_UP)) <= 0.99 else _Z_AXIS
    y = ref - float(ref @ d) * d
    y /= np.linalg.norm(y)
    x = np.cross(y, d)
    return np.column_stack([x, y, d])


def _interp_offset(keys, phase: float) -> np.ndarray:
    if len(keys) == 1:
        return np.asarray(keys[0][1], dtype=float)
    phases = [k[0] for k in keys]
    values = [np.asarray(k[1], dtype=float) for k in keys]
    # wrap the cycle: segment from the last keyframe back to the first at +1
    phases = phases + [phases[0] + 1.0]
    values = values + [values[0]]
    for lo in range(len(phases) - 1):
        if phases[lo] <= phase <= phases[lo + 1]:
            span = phases[lo + 1] - phases[lo]
            w = 0.0 if span <= 0 else (phase - phases[lo]) / span
            return (1.0 - w) * values[lo] + w * values[lo + 1]
    return values[0]


def script_positions(script: MotionScript, t: int) -> np.ndarray:
    """Noise-free joint positions (15, 3) at frame t."""
    phase = (t * script.tempo / script.cycle_frames) % 1.0
    pos = np.zeros((NUM_JOINTS, 3))
    for j in range(NUM_JOINTS):
        pos[j] = script.base_pose[j]
        keys = script.keyframes.get(j)
        if keys:
            pos[j] += _interp_offset(sorted(keys), phase)
    if script.scale != 1.0:
        anchor = 0.5 * (pos[LEFT_HIP] + pos[RIGHT_HIP])
        pos = anchor + script.scale * (pos - anchor)
    return pos


def generate_synthetic(
    script: MotionScript, seed: int, subject_id: str | None = None
) -> LabeledSequence:
    """Render a script to a labeled sequence; deterministic in (script, seed)."""
    if not script.base_pose:
        raise EmptyScriptError(f"script {script.name!r} defines no pose")
    n_frames = max(90, script.duration_frames)
    rng = np.random.default_rng(seed)
    frames = []
    for t in range(n_frames):
        pos = script_positions(script, t)
        if script.jitter_mm > 0.0:
            pos = pos + rng.normal(0.0, script.jitter_mm, size=pos.shape)
        orientations = np.empty((NUM_ORIENTED, 3, 3))
        for j in range(NUM_ORIENTED):
            parent, child = _BONES[j]
            orientations[j] = _limb_rotation(pos[child] - pos[parent])
        frames.append(
            SkeletonFrame(frame_index=t, positions=pos, orientations=orientations)
        )
    return LabeledSequence(
        frames=tuple(frames),
        activity_label=script.activity,
        location=script.location,
        subject_id=subject_id if subject_id is not None else f"seed{seed}",
    )


# -- benchmark scripts --------------------------------------------------------

def _desk(name, cycle, keyframes, duration=150):
    return MotionScript(
        name=name,
        activity=name,
        location="desk",
        duration_frames=duration,
        cycle_frames=cycle,
        jitter_mm=3.0,
        keyframes=keyframes,
    )


def benchmark_scripts() -> dict[str, MotionScript]:
    """Scripts for the synthetic benchmark.

    Four desk activities plus one random script; two 'floor' activities
    supply the out-of-location clusters desk models train against. Poses
    were tuned so between-script distances dominate the jitter.
    """
    rest = (0.0, 0.0, 0.0)
    scripts = {}

    # right hand cycles stomach -> mouth with a hold at the top; the left
    # hand stays raised as if steadying a saucer
    scripts["raise_cup"] = _desk(
        "raise_cup",
        cycle=60,
        keyframes={
            RIGHT_HAND: (
                (0.0, (-120.0, 220.0, -140.0)),
                (0.18, (-180.0, 380.0, -130.0)),
                (0.32, (-270.0, 610.0, -70.0)),
                (0.62, (-270.0, 610.0, -70.0)),
                (0.8, (-180.0, 380.0, -130.0)),
            ),
            RIGHT_ELBOW: (
                (0.0, (-30.0, 80.0, -70.0)),
                (0.32, (-70.0, 190.0, -100.0)),
                (0.62, (-70.0, 190.0, -100.0)),
            ),
            LEFT_HAND: ((0.0, (150.0, 300.0, -150.0)),),
            LEFT_ELBOW: ((0.0, (40.0, 110.0, -80.0)),),
            HEAD: ((0.0, (0.0, -20.0, -30.0)),),
        },
    )

    # right hand held at the ear nearly the whole cycle, elbow flared out,
    # head tilted into the hand, left hand resting on the hip
    scripts["phone"] = _desk(
        "phone",
        cycle=90,
        keyframes={
            RIGHT_HAND: (
                (0.0, rest),
                (0.08, (-250.0, 730.0, -20.0)),
                (0.88, (-250.0, 730.0, -20.0)),
                (0.96, rest),
            ),
            RIGHT_ELBOW: (
                (0.0, rest),
                (0.08, (90.0, 200.0, -20.0)),
                (0.88, (90.0, 200.0, -20.0)),
                (0.96, rest),
            ),
            LEFT_HAND: ((0.0, (210.0, 90.0, -40.0)),),
            LEFT_ELBOW: ((0.0, (70.0, 30.0, -30.0)),),
            HEAD: ((0.0, (35.0, -15.0, 0.0)),),
        },
    )

    # leaning over the counter, right hand chopping fast, left hand steady
    scripts["chop"] = _desk(
        "chop",
        cycle=20,
        keyframes={
            RIGHT_HAND: (
                (0.0, (-210.0, 90.0, -230.0)),
                (0.5, (-210.0, -70.0, -230.0)),
            ),
            RIGHT_ELBOW: (
                (0.0, (-70.0, 40.0, -130.0)),
                (0.5, (-70.0, -40.0, -130.0)),
            ),
            LEFT_HAND: ((0.0, (200.0, 50.0, -210.0)),),
            LEFT_ELBOW: ((0.0, (60.0, 20.0, -110.0)),),
            HEAD: ((0.0, (0.0, -80.0, -120.0)),),
            NECK: ((0.0, (0.0, -55.0, -85.0)),),
            LEFT_SHOULDER: ((0.0, (0.0, -25.0, -45.0)),),
            RIGHT_SHOULDER: ((0.0, (0.0, -25.0, -45.0)),),
        },
    )

    scripts["still"] = _desk("still", cycle=60, keyframes={})

    # floor activities: negatives for the desk location, spanning the pose
    # regions (overhead, sideways, crouched, forward reach) that unscripted
    # movement wanders through
    scripts["stretch"] = MotionScript(
        name="stretch",
        activity="stretch",
        location="floor",
        cycle_frames=120,
        jitter_mm=3.0,
        keyframes={
            LEFT_HAND: (
                (0.0, (120.0, 840.0, 30.0)),
                (0.35, (40.0, 780.0, 30.0)),
                (0.55, (-150.0, 430.0, 250.0)),   # arching back, arms behind
                (0.85, (-160.0, 420.0, 270.0)),
            ),
            RIGHT_HAND: (
                (0.0, (-120.0, 840.0, 30.0)),
                (0.35, (-40.0, 780.0, 30.0)),
                (0.55, (150.0, 430.0, 250.0)),
                (0.85, (160.0, 420.0, 270.0)),
            ),
            LEFT_ELBOW: (
                (0.0, (90.0, 420.0, 20.0)),
                (0.55, (-50.0, 200.0, 140.0)),
                (0.85, (-50.0, 200.0, 150.0)),
            ),
            RIGHT_ELBOW: (
                (0.0, (-90.0, 420.0, 20.0)),
                (0.55, (50.0, 200.0, 140.0)),
                (0.85, (50.0, 200.0, 150.0)),
            ),
            HEAD: ((0.0, (0.0, 30.0, 0.0)), (0.55, (0.0, -20.0, 135.0)),
                   (0.85, (0.0, -20.0, 140.0))),
            NECK: ((0.0, (0.0, 15.0, 0.0)), (0.55, (0.0, -10.0, 95.0)),
                   (0.85, (0.0, -10.0, 95.0))),
            TORSO: ((0.0, rest), (0.55, (0.0, 0.0, 50.0)), (0.85, (0.0, 0.0, 55.0))),
        },
    )
    scripts["wave"] = MotionScript(
        name="wave",
        activity="wave",
        location="floor",
        cycle_frames=30,
        jitter_mm=3.0,
        keyframes={
            RIGHT_HAND: (
                (0.0, (-420.0, 700.0, 60.0)),
                (0.5, (-120.0, 740.0, 60.0)),
            ),
            RIGHT_ELBOW: ((0.0, (-120.0, 330.0, 30.0)),),
            LEFT_HAND: ((0.0, (170.0, 510.0, 30.0)),),
            LEFT_ELBOW: ((0.0, (50.0, 250.0, 20.0)),),
        },
    )
    scripts["squat"] = MotionScript(
        name="squat",
        activity="squat",
        location="floor",
        cycle_frames=70,
        jitter_mm=3.0,
        keyframes={
            HEAD: ((0.0, (0.0, -240.0, -70.0)), (0.5, (0.0, -180.0, -50.0))),
            NECK: ((0.0, (0.0, -170.0, -50.0)), (0.5, (0.0, -120.0, -35.0))),
            TORSO: ((0.0, (0.0, -100.0, -25.0)), (0.5, (0.0, -70.0, -15.0))),
            LEFT_HAND: ((0.0, (70.0, -210.0, -180.0)),),
            RIGHT_HAND: ((0.0, (-70.0, -210.0, -180.0)),),
            LEFT_ELBOW: ((0.0, (20.0, -120.0, -90.0)),),
            RIGHT_ELBOW: ((0.0, (-20.0, -120.0, -90.0)),),
            LEFT_KNEE: ((0.0, (0.0, 70.0, -70.0)),),
            RIGHT_KNEE: ((0.0, (0.0, 70.0, -70.0)),),
        },
    )
    scripts["reach"] = MotionScript(
        name="reach",
        activity="reach",
        location="floor",
        cycle_frames=50,
        jitter_mm=3.0,
        keyframes={
            LEFT_HAND: ((0.0, (-130.0, 450.0, -460.0)), (0.5, (-130.0, 410.0, -540.0))),
            RIGHT_HAND: ((0.0, (130.0, 450.0, -460.0)), (0.5, (130.0, 410.0, -540.0))),
            LEFT_ELBOW: ((0.0, (30.0, 210.0, -260.0)),),
            RIGHT_ELBOW: ((0.0, (-30.0, 210.0, -260.0)),),
        },
    )

    # unscripted movement stand-in: holds a whole-body pose ~26 frames, then
    # shifts quickly to the next; the held poses (forward reach, T-pose,
    # overhead, crouch, lean back, one arm up one back) sit in the region
    # the floor activities span, away from every desk pose and its mirror
    def _hops(poses):
        keys = []
        for i, pose in enumerate(poses):
            keys.append((i / len(poses), pose))
            keys.append((i / len(poses) + 0.13, pose))
        return tuple(keys)

    scripts["random"] = MotionScript(
        name="random",
        activity=RANDOM,
        location="desk",
        cycle_frames=200,
        jitter_mm=6.0,
        keyframes={
            LEFT_HAND: _hops([
                (-130.0, 440.0, -500.0),   # both arms reaching high forward
                (-290.0, 500.0, 30.0),     # T-pose
                (110.0, 830.0, 30.0),      # both overhead
                (65.0, -220.0, -175.0),    # crouched, hands low
                (-155.0, 425.0, 258.0),    # arms back, leaning away
                (270.0, 920.0, 20.0),      # left straight up, right behind
            ]),
            RIGHT_HAND: _hops([
                (130.0, 440.0, -500.0),
                (290.0, 500.0, 30.0),
                (-110.0, 830.0, 30.0),
                (-65.0, -220.0, -175.0),
                (155.0, 425.0, 258.0),
                (40.0, -140.0, 190.0),
            ]),
            LEFT_ELBOW: _hops([
                (30.0, 200.0, -260.0),
                (-110.0, 240.0, 20.0),
                (85.0, 425.0, 25.0),
                (20.0, -125.0, -90.0),
                (-50.0, 200.0, 142.0),
                (140.0, 460.0, 10.0),
            ]),
            RIGHT_ELBOW: _hops([
                (-30.0, 200.0, -260.0),
                (110.0, 240.0, 20.0),
                (-85.0, 425.0, 25.0),
                (-20.0, -125.0, -90.0),
                (50.0, 200.0, 142.0),
                (-20.0, -90.0, 90.0),
            ]),
            HEAD: _hops([
                (0.0, 0.0, 0.0),
                (0.0, 0.0, 0.0),
                (0.0, 28.0, 0.0),
                (0.0, -235.0, -62.0),
                (0.0, -20.0, 136.0),
                (0.0, 5.0, 0.0),
            ]),
            NECK: _hops([
                (0.0, 0.0, 0.0),
                (0.0, 0.0, 0.0),
                (0.0, 14.0, 0.0),
                (0.0, -162.0, -46.0),
                (0.0, -10.0, 94.0),
                (0.0, 0.0, 0.0),
            ]),
            TORSO: _hops([
                (0.0, 0.0, 0.0),
                (0.0, 0.0, 0.0),
                (0.0, 0.0, 0.0),
                (0.0, -96.0, -22.0),
                (0.0, 0.0, 51.0),
                (0.0, 0.0, 0.0),
            ]),
            LEFT_KNEE: _hops([
                (0.0, 0.0, 0.0),
                (0.0, 0.0, 0.0),
                (0.0, 0.0, 0.0),
                (0.0, 66.0, -66.0),
                (0.0, 0.0, 0.0),
                (0.0, 0.0, 0.0),
            ]),
            RIGHT_KNEE: _hops([
                (0.0, 0.0, 0.0),
                (0.0, 0.0, 0.0),
                (0.0, 0.0, 0.0),
                (0.0, 66.0, -66.0),
                (0.0, 0.0, 0.0),
                (0.0, 0.0, 0.0),
            ]),
        },
    )
    return scripts


def subject_variant(script: MotionScript, subject_index: int) -> MotionScript:
    """Body-scale and tempo idiosyncrasies for one synthetic subject."""
    scales = (1.0, 0.92, 1.08)
    tempos = (1.0, 0.88, 1.13)
    return replace(
        script,
        scale=scales[subject_index % len(scales)],
        tempo=tempos[subject_index % len(tempos)],
    )


def build_benchmark_dataset(
    n_subjects: int = 3,
    reps: int = 2,
    duration_frames: int = 150,
    base_seed: int = 0,
) -> list[LabeledSequence]:
    """All benchmark sequences: scripted activities plus per-subject random."""
    scripts = benchmark_scripts()
    names = sorted(scripts)
    sequences = []
    for s in range(n_subjects):
        subject_id = f"subj{s}"
        for a, name in enumerate(names):
            script = subject_variant(
                replace(scripts[name], duration_frames=duration_frames), s
            )
            n = 1 if script.activity == RANDOM else reps
            for r in range(n):
                seed = base_seed + 100_000 * s + 1_000 * a + r
                sequences.append(generate_synthetic(script, seed, subject_id))
    return sequences
