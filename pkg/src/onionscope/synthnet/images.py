"""Procedural image synthesis with planted similarity and camera structure.

Similarity clusters share a base scene with small jitter, keeping difference
hashes within the clustering threshold. Camera images embed a per-camera
multiplicative sensor pattern under diverse scenes, so noise residuals
correlate only within a camera.

Scenes are low-pass-filtered white noise: smooth at pixel scale (the
denoiser strips them from noise residuals) yet independent across draws at
difference-hash scale. Draws are additionally rejection-sampled so any two
planted structures sit at least MIN_PLANT_DISTANCE hash bits apart; cluster
members jitter only a few bits off their base, so distinct structures can
never collide at the clustering threshold, whatever the world seed.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from ..imaging import dhash

SIMILARITY_SIZE = 96   # above the icon cutoff, below the camera cutoff is fine
CAMERA_SIZE = 128
PATTERN_STRENGTH = 0.030  # relative multiplicative amplitude
MIN_PLANT_DISTANCE = 20   # hash bits between planted structures (jitter uses ~4)
SCENE_SMOOTHING = 3.0     # gaussian sigma, pixels
SCENE_CONTRAST = 20.0


def _scene(rng: np.random.Generator, size: int) -> np.ndarray:
    """White noise blurred in the frequency domain, spanning mid grey."""
    noise = rng.normal(0.0, 1.0, (size, size))
    fy = np.fft.fftfreq(size)[:, None]
    fx = np.fft.rfftfreq(size)[None, :]
    transfer = np.exp(-2.0 * (np.pi * SCENE_SMOOTHING) ** 2 * (fx * fx + fy * fy))
    field = np.fft.irfft2(np.fft.rfft2(noise) * transfer, s=(size, size))
    field *= SCENE_CONTRAST / field.std()
    return 120.0 + field


def _apart(make, taken: list[int] | None, tries: int = 200) -> np.ndarray:
    """Redraw until the candidate's hash clears every planted hash, then
    record it. With hash distances concentrated near 32 bits this rejects
    a few percent of draws; the cap is purely defensive."""
    for _ in range(tries):
        arr = make()
        if taken is None:
            return arr
        h = dhash(arr)
        if all(bin(h ^ t).count("1") >= MIN_PLANT_DISTANCE for t in taken):
            taken.append(h)
            return arr
    raise RuntimeError("could not draw a hash-separated scene")


def to_png(arr: np.ndarray) -> bytes:
    img = Image.fromarray(np.clip(arr, 0, 255).astype(np.uint8), mode="L")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def similarity_base(rng: np.random.Generator, size: int = SIMILARITY_SIZE,
                    taken: list[int] | None = None) -> np.ndarray:
    return _apart(lambda: _scene(rng, size), taken)


def similarity_member(base: np.ndarray, rng: np.random.Generator) -> bytes:
    """A near-duplicate of the base: pixel jitter plus a brightness shift."""
    jitter = rng.normal(0, 1.5, base.shape)
    shift = rng.uniform(-6, 6)
    return to_png(base + jitter + shift)


def camera_pattern(rng: np.random.Generator, size: int = CAMERA_SIZE) -> np.ndarray:
    """Fixed multiplicative sensor pattern for one synthetic camera."""
    return rng.normal(0, PATTERN_STRENGTH, (size, size))


def camera_capture(pattern: np.ndarray, rng: np.random.Generator,
                   taken: list[int] | None = None) -> bytes:
    """One photo from the camera owning ``pattern``: its own scene times the
    shared pattern, plus shot noise."""
    def shoot() -> np.ndarray:
        scene = _scene(rng, pattern.shape[0])
        shot = rng.normal(0, 1.0, pattern.shape)
        return scene * (1.0 + pattern) + shot

    return to_png(_apart(shoot, taken))


def distinct_image(rng: np.random.Generator, size: int = SIMILARITY_SIZE,
                   taken: list[int] | None = None) -> bytes:
    """A standalone scene, not a member of any planted cluster."""
    return to_png(_apart(lambda: _scene(rng, size), taken))
