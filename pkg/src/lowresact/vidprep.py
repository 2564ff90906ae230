"""Video data model, resolution degradation, and unitization.

Clips are held as float arrays in [0, 1], shape (L, H, W, 3). The degradation
pipeline that produces "low resolution" training/testing material is: area
average down to 12x16, then separable bicubic (Catmull-Rom, a = -0.5) back up
to 112x112, so the upsampled frames carry no more information than the 12x16
ones.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

HIGH = "high"
LOW = "low"

LR_HEIGHT, LR_WIDTH = 12, 16
NET_HEIGHT, NET_WIDTH = 112, 112

FRAME_PATTERN = "frame_{:06d}.png"


@dataclass
class VideoClip:
    """A labelled frame sequence at a single resolution."""

    frames: np.ndarray  # (L, H, W, 3) float in [0, 1]
    label: int
    resolution: str = HIGH
    source_id: str = ""

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 4 or self.frames.shape[3] != 3:
            raise ValueError(f"clip frames must be (L, H, W, 3), got {self.frames.shape}")
        if self.frames.shape[0] < 1:
            raise ValueError("clip must contain at least one frame")
        if self.resolution not in (HIGH, LOW):
            raise ValueError(f"unknown resolution tag {self.resolution!r}")
        if not np.isfinite(self.frames).all():
            raise ValueError("clip contains non-finite pixels")

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def frame_shape(self) -> tuple:
        return self.frames.shape[1:3]


@dataclass
class VideoUnit:
    """A block of consecutive frames, the atomic network input."""

    frames: np.ndarray  # (unit_len, H, W, 3)
    unit_index: int  # 1-based position within the clip

    def __post_init__(self):
        if self.frames.ndim != 4:
            raise ValueError("unit frames must be (unit_len, H, W, 3)")
        if self.unit_index < 1:
            raise ValueError("unit_index is 1-based")


def _area_matrix(n_in: int, n_out: int, dtype=np.float64) -> np.ndarray:
    """Row-stochastic (n_out, n_in) matrix performing area-weighted averaging.

    Output cell i covers the source interval [i*s, (i+1)*s) with s = n_in/n_out;
    each source pixel contributes in proportion to its overlap with that
    interval. When s is an integer this reduces to exact block means.
    """
    scale = n_in / n_out
    mat = np.zeros((n_out, n_in), dtype=dtype)
    for i in range(n_out):
        lo, hi = i * scale, (i + 1) * scale
        j0, j1 = int(np.floor(lo)), int(np.ceil(hi))
        for j in range(j0, min(j1, n_in)):
            overlap = min(hi, j + 1) - max(lo, j)
            if overlap > 0:
                mat[i, j] = overlap / scale
    return mat


def cubic_kernel(s, a: float = -0.5):
    """Cubic convolution kernel (Catmull-Rom for a = -0.5). Reproduces
    constants and degree-1 polynomials; support is |s| < 2."""
    s = np.abs(np.asarray(s, dtype=np.float64))
    out = np.zeros_like(s)
    near = s <= 1.0
    far = (s > 1.0) & (s < 2.0)
    out[near] = (a + 2.0) * s[near] ** 3 - (a + 3.0) * s[near] ** 2 + 1.0
    out[far] = a * s[far] ** 3 - 5.0 * a * s[far] ** 2 + 8.0 * a * s[far] - 4.0 * a
    return out


def _cubic_matrix(n_in: int, n_out: int, dtype=np.float64) -> np.ndarray:
    """(n_out, n_in) separable bicubic resampling matrix.

    Half-pixel-centred mapping src = (dst + 0.5) * n_in/n_out - 0.5 with the
    four taps around src; taps outside the signal are clamped to the edge
    sample (their weight accumulates there).
    """
    scale = n_in / n_out
    mat = np.zeros((n_out, n_in), dtype=dtype)
    for i in range(n_out):
        src = (i + 0.5) * scale - 0.5
        base = int(np.floor(src))
        t = src - base
        for k in range(-1, 3):
            w = cubic_kernel(k - t)
            j = min(max(base + k, 0), n_in - 1)
            mat[i, j] += w
    return mat


def _apply_separable(frame: np.ndarray, row_mat: np.ndarray, col_mat: np.ndarray) -> np.ndarray:
    """Resample rows then columns; works for (H, W) and (H, W, C) arrays."""
    if frame.ndim == 2:
        return row_mat @ frame @ col_mat.T
    out = np.einsum("oh,hwc->owc", row_mat, frame)
    return np.einsum("ow,hwc->hoc", col_mat, out)


def _check_frame(frame: np.ndarray) -> np.ndarray:
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim not in (2, 3):
        raise ValueError(f"frame must be (H, W) or (H, W, C), got shape {frame.shape}")
    if frame.shape[0] < 1 or frame.shape[1] < 1:
        raise ValueError("frame dimensions must be positive")
    if not np.isfinite(frame).all():
        raise ValueError("frame contains non-finite pixels")
    return frame


def average_downsample(frame: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Area-average resize. Each output pixel is the (area-weighted) mean of
    its source block, per channel; exact block means when sizes divide."""
    frame = _check_frame(frame)
    in_h, in_w = frame.shape[:2]
    if out_h <= 0 or out_w <= 0:
        raise ValueError(f"output dims must be positive, got {out_h}x{out_w}")
    if out_h > in_h or out_w > in_w:
        raise ValueError(
            f"average_downsample cannot enlarge: {in_h}x{in_w} -> {out_h}x{out_w}"
        )
    return _apply_separable(frame, _area_matrix(in_h, out_h), _area_matrix(in_w, out_w))


def bicubic_upsample(frame: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Separable cubic-convolution resize (a = -0.5, half-pixel centres,
    edge-clamped). Deterministic; no antialias prefilter."""
    frame = _check_frame(frame)
    in_h, in_w = frame.shape[:2]
    if out_h <= 0 or out_w <= 0:
        raise ValueError(f"output dims must be positive, got {out_h}x{out_w}")
    if in_h < 2 or in_w < 2:
        raise ValueError("bicubic_upsample needs at least a 2x2 input")
    return _apply_separable(frame, _cubic_matrix(in_h, out_h), _cubic_matrix(in_w, out_w))


def make_lr_clip(clip: VideoClip, lr_h: int = LR_HEIGHT, lr_w: int = LR_WIDTH,
                 out_h: int = NET_HEIGHT, out_w: int = NET_WIDTH) -> VideoClip:
    """Degrade a high-resolution clip: area-average to lr_h x lr_w, then
    bicubic back up to out_h x out_w. Label and frame count are preserved."""
    if clip.resolution != HIGH:
        raise ValueError("make_lr_clip expects a high-resolution clip")
    in_h, in_w = clip.frame_shape
    down = _area_matrix(in_h, lr_h), _area_matrix(in_w, lr_w)
    up = _cubic_matrix(lr_h, out_h), _cubic_matrix(lr_w, out_w)
    frames = np.empty((clip.num_frames, out_h, out_w, 3))
    for i in range(clip.num_frames):
        small = _apply_separable(clip.frames[i], *down)
        frames[i] = _apply_separable(small, *up)
    return VideoClip(frames=np.clip(frames, 0.0, 1.0), label=clip.label,
                     resolution=LOW, source_id=clip.source_id)


def resize_clip(clip: VideoClip, out_h: int, out_w: int) -> VideoClip:
    """Area-average every frame to a common size (used to bring high-resolution
    clips down to the 112x112 network input)."""
    mats = _area_matrix(clip.frame_shape[0], out_h), _area_matrix(clip.frame_shape[1], out_w)
    frames = np.stack([_apply_separable(f, *mats) for f in clip.frames])
    return VideoClip(frames=frames, label=clip.label, resolution=clip.resolution,
                     source_id=clip.source_id)


def unitize(clip: VideoClip, unit_len: int) -> list:
    """Split a clip into ceil(L / unit_len) non-overlapping units.

    A ragged final unit is padded by repeating the last frame, so every unit
    has exactly unit_len frames and concatenating the units (minus padding)
    reconstructs the clip.
    """
    if unit_len < 1:
        raise ValueError("unit_len must be >= 1")
    length = clip.num_frames
    if length < 1:
        raise ValueError("cannot unitize an empty clip")
    units = []
    for start in range(0, length, unit_len):
        block = clip.frames[start : start + unit_len]
        if block.shape[0] < unit_len:
            pad = np.repeat(block[-1:], unit_len - block.shape[0], axis=0)
            block = np.concatenate([block, pad], axis=0)
        units.append(VideoUnit(frames=block, unit_index=start // unit_len + 1))
    return units


# --- clip-on-disk format -----------------------------------------------------
# A directory per clip holding zero-padded numbered PNG frames. Pixels are
# stored as 8-bit RGB and come back as floats in [0, 1].

def save_clip_frames(directory: str, frames: np.ndarray) -> None:
    os.makedirs(directory, exist_ok=True)
    for i, frame in enumerate(frames):
        img = Image.fromarray(np.round(np.clip(frame, 0.0, 1.0) * 255.0).astype(np.uint8))
        img.save(os.path.join(directory, FRAME_PATTERN.format(i)), compress_level=1)


def load_clip_frames(directory: str, dtype=np.float64) -> np.ndarray:
    names = sorted(n for n in os.listdir(directory) if re.fullmatch(r"frame_\d+\.png", n))
    if not names:
        raise ValueError(f"{directory}: no frame files")
    frames = [np.asarray(Image.open(os.path.join(directory, n)).convert("RGB")) for n in names]
    return np.stack(frames).astype(dtype) / 255.0


def load_clip_frames_u8(directory: str) -> np.ndarray:
    """Raw uint8 loader for memory-conscious callers."""
    names = sorted(n for n in os.listdir(directory) if re.fullmatch(r"frame_\d+\.png", n))
    if not names:
        raise ValueError(f"{directory}: no frame files")
    return np.stack([np.asarray(Image.open(os.path.join(directory, n)).convert("RGB"))
                     for n in names])
