"""Image similarity and source-camera attribution over hashes only.

Raw image bytes never leave the fetch path: pages contribute a 64-bit
difference hash for content similarity and, for large-enough images, a
sensor-noise residual for camera attribution. Clustering is agglomerative
with average linkage, cut at a configurable threshold.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from PIL import Image
from scipy.ndimage import median_filter

# Conventional near-duplicate bound for 64-bit difference hashes.
DEFAULT_HD_THRESHOLD = 10
# Camera-match bound for peak-to-correlation-energy scores.
DEFAULT_PCE_THRESHOLD = 60.0

PEAK_NEIGHBORHOOD = 11  # square window excluded from the PCE noise floor


class UndecodableImage(ValueError):
    pass


def decode_image(data: bytes) -> tuple[np.ndarray, int, int, str]:
    """Decode image bytes to a grayscale float array plus (width, height,
    format tag). Raises UndecodableImage for bytes PIL cannot read."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            img.load()
            width, height = img.size
            fmt = (img.format or "unknown").lower()
            gray = np.asarray(img.convert("L"), dtype=np.float64)
    except UndecodableImage:
        raise
    except Exception as exc:
        raise UndecodableImage(str(exc)) from exc
    return gray, width, height, fmt


def dhash(image: "Image.Image | np.ndarray") -> int:
    """64-bit difference hash: grayscale, resize to 9x8, compare each pixel
    with its right neighbor. Insensitive to uniform brightness scaling."""
    if isinstance(image, np.ndarray):
        arr = np.clip(image, 0, 255).astype(np.uint8)
        pil = Image.fromarray(arr if arr.ndim == 2 else arr, mode="L" if arr.ndim == 2 else None)
    else:
        pil = image
    small = pil.convert("L").resize((9, 8), Image.Resampling.LANCZOS)
    pixels = np.asarray(small, dtype=np.int16)
    bits = pixels[:, 1:] > pixels[:, :-1]
    value = 0
    for bit in bits.flatten():
        value = (value << 1) | int(bit)
    return value


def hamming(a: int, b: int) -> int:
    return bin(a ^ b).count("1")


def hamming_matrix(hashes: Sequence[int]) -> np.ndarray:
    """Pairwise Hamming distances of 64-bit hashes, vectorized over bytes."""
    n = len(hashes)
    arr = np.zeros((n, 8), dtype=np.uint8)
    for i, h in enumerate(hashes):
        arr[i] = np.frombuffer(int(h).to_bytes(8, "big"), dtype=np.uint8)
    xor = arr[:, None, :] ^ arr[None, :, :]
    return np.unpackbits(xor, axis=2).sum(axis=2).astype(np.int32)


# -- sensor noise fingerprinting --------------------------------------


def prnu_residual(pixels: np.ndarray) -> np.ndarray:
    """Noise residual: pixels minus a 3x3 median denoise, zero-meaned."""
    arr = np.asarray(pixels, dtype=np.float64)
    residual = arr - median_filter(arr, size=3)
    return residual - residual.mean()


def _central_crop(arr: np.ndarray, h: int, w: int) -> np.ndarray:
    top = (arr.shape[0] - h) // 2
    left = (arr.shape[1] - w) // 2
    return arr[top : top + h, left : left + w]


def pce(a: np.ndarray, b: np.ndarray) -> float:
    """Peak-to-correlation-energy between two residuals.

    Circular cross-correlation via FFT; the score is the squared peak over
    the mean squared correlation outside an 11x11 window around the peak.
    Mismatched shapes are central-cropped to the common size first.
    """
    h = min(a.shape[0], b.shape[0])
    w = min(a.shape[1], b.shape[1])
    a = _central_crop(np.asarray(a, dtype=np.float64), h, w)
    b = _central_crop(np.asarray(b, dtype=np.float64), h, w)
    a = a - a.mean()
    b = b - b.mean()
    corr = np.fft.ifft2(np.fft.fft2(a) * np.conj(np.fft.fft2(b))).real
    return _pce_from_surface(corr)


def _pce_from_surface(corr: np.ndarray) -> float:
    h, w = corr.shape
    peak_idx = np.unravel_index(np.argmax(corr), corr.shape)
    peak = corr[peak_idx]
    half = PEAK_NEIGHBORHOOD // 2
    rows = (np.arange(h)[:, None] - peak_idx[0] + h // 2) % h - h // 2
    cols = (np.arange(w)[None, :] - peak_idx[1] + w // 2) % w - w // 2
    outside = (np.abs(rows) > half) | (np.abs(cols) > half)
    energy = np.mean(corr[outside] ** 2)
    if energy == 0:
        return float("inf")
    return float(peak**2 / energy)


def pce_matrix(residuals: Sequence[np.ndarray]) -> np.ndarray:
    """All-pairs PCE scores with per-image FFTs computed once.

    Residuals are central-cropped to the common minimum size so a single
    FFT per image serves every pairing.
    """
    n = len(residuals)
    if n == 0:
        return np.zeros((0, 0))
    h = min(r.shape[0] for r in residuals)
    w = min(r.shape[1] for r in residuals)
    ffts = []
    for r in residuals:
        cropped = _central_crop(np.asarray(r, dtype=np.float64), h, w)
        cropped = cropped - cropped.mean()
        ffts.append(np.fft.fft2(cropped))
    scores = np.zeros((n, n))
    for i in range(n):
        scores[i, i] = float("inf")
        for j in range(i + 1, n):
            corr = np.fft.ifft2(ffts[i] * np.conj(ffts[j])).real
            scores[i, j] = scores[j, i] = _pce_from_surface(corr)
    return scores


# -- eligibility -------------------------------------------------------


def similarity_eligible(width: Optional[int], height: Optional[int]) -> bool:
    """Images with size <= 64 pixels (max dimension) are icons/logos and are
    excluded from similarity analysis. Unknown dimensions are ineligible."""
    if width is None or height is None:
        return False
    return max(width, height) > 64


def camera_eligible(width: Optional[int], height: Optional[int]) -> bool:
    """Images with size <= 100x100 are previews/thumbnails and are excluded
    from camera attribution. Unknown dimensions are ineligible."""
    if width is None or height is None:
        return False
    return not (width <= 100 and height <= 100)


# -- agglomerative clustering ------------------------------------------


@dataclass(slots=True)
class ImageCluster:
    members: list  # item ids, sorted
    kind: str      # "similarity" | "camera"


def _ahc_partition(
    scores: np.ndarray,
    threshold: float,
    higher_is_similar: bool,
) -> list[list[int]]:
    """Average-linkage agglomeration over an explicit score matrix, merging
    while the best linkage is within the threshold. Ties break toward the
    pair containing the smallest member index. Returns index groups."""
    n = scores.shape[0]
    clusters: list[list[int]] = [[i] for i in range(n)]
    while len(clusters) > 1:
        best = None
        best_key = None
        for ai in range(len(clusters)):
            for bi in range(ai + 1, len(clusters)):
                pair_scores = [
                    scores[x, y] for x in clusters[ai] for y in clusters[bi]
                ]
                linkage = float(np.mean(pair_scores))
                ordered = -linkage if higher_is_similar else linkage
                lo, hi = sorted((min(clusters[ai]), min(clusters[bi])))
                key = (ordered, lo, hi)
                if best_key is None or key < best_key:
                    best_key = key
                    best = (ai, bi, linkage)
        ai, bi, linkage = best
        if higher_is_similar:
            if linkage < threshold:
                break
        else:
            if linkage > threshold:
                break
        merged = sorted(clusters[ai] + clusters[bi])
        rest = [c for k, c in enumerate(clusters) if k not in (ai, bi)]
        clusters = rest + [merged]
    return sorted(clusters, key=lambda c: c[0])


def cluster(
    ids: Sequence,
    scores: np.ndarray,
    threshold: float,
    kind: str,
    higher_is_similar: bool = False,
) -> list[ImageCluster]:
    """Cut average-linkage AHC at the threshold.

    Items are first split into connected components under the "mergeable
    pair" relation; average linkage can never join clusters with no
    within-threshold pair, so per-component agglomeration reproduces the
    global result while keeping the O(n^3) step local.
    """
    n = len(ids)
    if n == 0:
        return []
    mergeable = scores >= threshold if higher_is_similar else scores <= threshold
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if mergeable[i, j]:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    components: dict[int, list[int]] = {}
    for i in range(n):
        components.setdefault(find(i), []).append(i)

    result: list[ImageCluster] = []
    for root in sorted(components):
        comp = components[root]
        if len(comp) == 1:
            result.append(ImageCluster([ids[comp[0]]], kind))
            continue
        sub = scores[np.ix_(comp, comp)]
        for group in _ahc_partition(sub, threshold, higher_is_similar):
            members = sorted(ids[comp[g]] for g in group)
            result.append(ImageCluster(members, kind))
    result.sort(key=lambda c: c.members[0])
    return result
