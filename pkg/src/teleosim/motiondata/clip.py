"""Motion clip schema, validation, and the line-delimited clip file format.

A clip is a fixed-rate (50 Hz) time series of frames. Channel arrays are
stored contiguously; frames are views. Clips are treated as immutable after
construction: editing operations build new clips and may share arrays they
do not change.

File format: one JSON header line followed by one whitespace-separated float
line per frame, in the order joint_pos (J), root_pos (3), root_yaw (1),
head_pos (3), wrist_pos (6, left then right), wrist_orient (8, wxyz each).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

CLIP_FPS = 50
CLIP_SCHEMA = "teleosim-clip"
CLIP_VERSION = 1

CATEGORIES = (
    "stand", "walk", "squat", "wave", "reach", "jump", "punch", "turn", "mixed",
)


class ClipFormatError(ValueError):
    """Base for clip file problems."""


class ClipSchemaError(ClipFormatError):
    """Bad header, wrong schema name or version."""


class ClipFrameError(ClipFormatError):
    def __init__(self, frame: int, message: str):
        super().__init__(f"frame {frame}: {message}")
        self.frame = frame


class ClipQuaternionError(ClipFrameError):
    pass


@dataclass
class MotionFrame:
    joint_pos: np.ndarray      # (J,)
    root_pos: np.ndarray       # (3,)
    root_yaw: float
    head_pos: np.ndarray       # (3,)
    wrist_pos: np.ndarray      # (2, 3)
    wrist_orient: np.ndarray   # (2, 4)


@dataclass
class MotionClip:
    name: str
    category: str
    joint_pos: np.ndarray      # (T, J)
    root_pos: np.ndarray       # (T, 3)
    root_yaw: np.ndarray       # (T,)
    head_pos: np.ndarray       # (T, 3)
    wrist_pos: np.ndarray      # (T, 2, 3)
    wrist_orient: np.ndarray   # (T, 2, 4)
    fps: int = CLIP_FPS

    @property
    def n_frames(self) -> int:
        return self.joint_pos.shape[0]

    @property
    def n_joints(self) -> int:
        return self.joint_pos.shape[1]

    @property
    def duration(self) -> float:
        return (self.n_frames - 1) / self.fps

    def frame(self, i: int) -> MotionFrame:
        return MotionFrame(
            joint_pos=self.joint_pos[i],
            root_pos=self.root_pos[i],
            root_yaw=float(self.root_yaw[i]),
            head_pos=self.head_pos[i],
            wrist_pos=self.wrist_pos[i],
            wrist_orient=self.wrist_orient[i],
        )

    def validate(self) -> None:
        """Raise a ClipFormatError subclass on the first schema violation."""
        if self.fps != CLIP_FPS:
            raise ClipSchemaError(f"fps must be {CLIP_FPS}, got {self.fps}")
        if self.category not in CATEGORIES:
            raise ClipSchemaError(f"unknown category {self.category!r}")
        if self.n_frames < 2:
            raise ClipSchemaError("clips need at least 2 frames")
        t = self.n_frames
        shapes = {
            "joint_pos": (t, self.n_joints), "root_pos": (t, 3), "root_yaw": (t,),
            "head_pos": (t, 3), "wrist_pos": (t, 2, 3), "wrist_orient": (t, 2, 4),
        }
        for name, shape in shapes.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ClipSchemaError(f"{name} has shape {arr.shape}, want {shape}")
            if not np.all(np.isfinite(arr)):
                bad = int(np.argwhere(~np.isfinite(arr))[0][0])
                raise ClipFrameError(bad, f"non-finite value in {name}")
        norms = np.linalg.norm(self.wrist_orient, axis=2)
        off = np.abs(norms - 1.0) > 1e-6
        if np.any(off):
            bad = int(np.argwhere(off)[0][0])
            raise ClipQuaternionError(
                bad, f"wrist quaternion norm {norms[off][0]:.4f} is not unit"
            )
        if np.any(self.head_pos[:, 2] <= 0.0) or np.any(self.head_pos[:, 2] > 2.0):
            bad = int(np.argwhere((self.head_pos[:, 2] <= 0) | (self.head_pos[:, 2] > 2))[0][0])
            raise ClipFrameError(bad, "head height outside (0, 2.0] m")

    def equal_fields(self, other: "MotionClip") -> bool:
        return (
            self.name == other.name and self.category == other.category
            and self.fps == other.fps
            and all(
                np.array_equal(getattr(self, n), getattr(other, n))
                for n in ("joint_pos", "root_pos", "root_yaw", "head_pos",
                          "wrist_pos", "wrist_orient")
            )
        )


def make_clip(name: str, category: str, joint_pos, root_pos, root_yaw,
              head_pos, wrist_pos, wrist_orient) -> MotionClip:
    clip = MotionClip(
        name=name,
        category=category,
        joint_pos=np.asarray(joint_pos, dtype=np.float64),
        root_pos=np.asarray(root_pos, dtype=np.float64),
        root_yaw=np.asarray(root_yaw, dtype=np.float64),
        head_pos=np.asarray(head_pos, dtype=np.float64),
        wrist_pos=np.asarray(wrist_pos, dtype=np.float64),
        wrist_orient=np.asarray(wrist_orient, dtype=np.float64),
    )
    clip.validate()
    return clip


def write_clip(clip: MotionClip, path) -> None:
    clip.validate()
    header = {
        "schema": CLIP_SCHEMA,
        "version": CLIP_VERSION,
        "name": clip.name,
        "category": clip.category,
        "fps": clip.fps,
        "joints": clip.n_joints,
        "frames": clip.n_frames,
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for i in range(clip.n_frames):
            row = np.concatenate([
                clip.joint_pos[i],
                clip.root_pos[i],
                [clip.root_yaw[i]],
                clip.head_pos[i],
                clip.wrist_pos[i].ravel(),
                clip.wrist_orient[i].ravel(),
            ])
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_clip(path) -> MotionClip:
    with open(path) as fh:
        first = fh.readline()
        try:
            header = json.loads(first)
        except json.JSONDecodeError as e:
            raise ClipSchemaError(f"unreadable header: {e}") from e
        if header.get("schema") != CLIP_SCHEMA:
            raise ClipSchemaError(f"not a {CLIP_SCHEMA} file")
        if header.get("version") != CLIP_VERSION:
            raise ClipSchemaError(
                f"schema version {header.get('version')} unsupported "
                f"(expected {CLIP_VERSION})"
            )
        n_joints = int(header["joints"])
        n_frames = int(header["frames"])
        width = n_joints + 3 + 1 + 3 + 6 + 8
        rows = np.zeros((n_frames, width))
        for i in range(n_frames):
            line = fh.readline()
            if not line:
                raise ClipFrameError(i, "file truncated")
            parts = line.split()
            if len(parts) != width:
                raise ClipFrameError(i, f"expected {width} values, got {len(parts)}")
            try:
                rows[i] = [float(p) for p in parts]
            except ValueError as e:
                raise ClipFrameError(i, f"unparseable value: {e}") from e
    j = n_joints
    clip = MotionClip(
        name=header["name"],
        category=header["category"],
        fps=int(header["fps"]),
        joint_pos=rows[:, :j],
        root_pos=rows[:, j:j + 3],
        root_yaw=rows[:, j + 3],
        head_pos=rows[:, j + 4:j + 7],
        wrist_pos=rows[:, j + 7:j + 13].reshape(n_frames, 2, 3),
        wrist_orient=rows[:, j + 13:j + 21].reshape(n_frames, 2, 4),
    )
    clip.validate()
    return clip
