"""Terrain-complexity classification.

Three interchangeable backends produce the same assessment type:

* a geometric baseline that counts rough cells and fits local planes on an
  elevation patch, then applies hand-set thresholds;
* a wire client that sends a rendered image plus a text prompt to an
  external vision-language endpoint and enforces a strict JSON response;
* a deterministic mock that scores terrain straight from the generating
  parameters, so closed-loop runs need no network and no model.
"""

from __future__ import annotations

import base64
import json
import math
import socket
import urllib.error
import urllib.request
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import (
    InsufficientDataError,
    ValidationError,
    VlmSchemaError,
    VlmTimeoutError,
    VlmTransportError,
)
from .grids import plane_fit_grid, plane_fit_points, slope_degrees
from .mapping import ElevationGrid
from .modes import TerrainClass
from .terrain import HeightField, ROCK_SCORE_GAIN, TerrainSpec
from . import pgmio


@dataclass(frozen=True)
class TerrainAssessment:
    terrain_class: TerrainClass
    rock_complexity: float
    slope_complexity: float
    timestamp: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.rock_complexity <= 1.0 and 0.0 <= self.slope_complexity <= 1.0):
            raise ValidationError("complexity scores must lie in [0, 1]")


@dataclass(frozen=True)
class GeometricMetrics:
    rock_grid_count: float
    slope_avg: float       # degrees
    slope_variance: float  # degrees^2


@dataclass(frozen=True)
class GeometricThresholds:
    """Hand-set classification cutoffs for the geometric baseline.

    The defaults split the measured flat/rocky/challenging populations at
    their midpoints: flat patches measure ~0 rough cells against >=125 for
    rocky ones, and rocky patches stay below ~8 deg average slope against
    >=20 deg for challenging ones. Slope variance is deliberately unused;
    it overlaps between the rocky and challenging populations.
    """

    rock_count_min_rocky: float = 60.0
    slope_avg_min_challenging: float = 14.0
    stddev_rock_cell: float = 0.1
    analysis_radius: float = 10.0


@dataclass(frozen=True)
class ScoreRule:
    """Maps (rock, slope) scores to a class; shared by mock and validation."""

    slope_cutoff: float = 0.5
    rock_cutoff: float = 0.25

    def classify(self, rock: float, slope: float) -> TerrainClass:
        if slope >= self.slope_cutoff:
            return TerrainClass.CHALLENGING
        if rock >= self.rock_cutoff:
            return TerrainClass.ROCKY
        return TerrainClass.FLAT


def compute_terrain_metrics(
    patch: HeightField | ElevationGrid,
    radius: float,
    stddev_rock_cell: float = 0.1,
    fit_window_m: float = 2.0,
    fit_stride_m: float = 1.0,
) -> GeometricMetrics:
    """Geometric terrain features over a circular region of a patch.

    rock_grid_count counts cells whose known 3x3 neighborhood elevation
    standard deviation exceeds stddev_rock_cell. Average slope and slope
    variance come from least-squares plane fits over overlapping
    fit_window_m sub-windows whose centers lie inside the region.
    """
    if isinstance(patch, ElevationGrid):
        z, known = patch.elevation, patch.known
        cell, origin = patch.cell_size, patch.origin
    else:
        z, known = patch.elevation, np.isfinite(patch.elevation)
        cell, origin = patch.cell_size, patch.origin
    rows, cols = z.shape
    if rows == 0 or cols == 0:
        raise InsufficientDataError("patch is empty")
    half_x = cols * cell / 2.0
    half_y = rows * cell / 2.0
    if radius > min(half_x, half_y) + 1e-9:
        raise ValidationError("analysis radius exceeds the patch half-extent")

    cx = origin[0] + half_x
    cy = origin[1] + half_y
    xs = origin[0] + (np.arange(cols) + 0.5) * cell
    ys = origin[1] + (np.arange(rows) + 0.5) * cell
    gx, gy = np.meshgrid(xs, ys)
    region = (gx - cx) ** 2 + (gy - cy) ** 2 <= radius * radius
    if not (region & known).any():
        raise InsufficientDataError("no known cells inside the analysis region")

    std = _neighborhood_std(z, known)
    rock_grid_count = int(np.count_nonzero(region & known & (std > stddev_rock_cell)))

    win = max(int(round(fit_window_m / cell)) | 1, 3)
    a, b, _, _, count = plane_fit_grid(z, known, win, cell)
    slope = slope_degrees(a, b)
    stride = max(int(round(fit_stride_m / cell)), 1)
    centers = np.zeros_like(region)
    centers[::stride, ::stride] = True
    sel = centers & region & (count >= 3)
    samples = slope[sel]
    if samples.size == 0:
        raise InsufficientDataError("no plane-fit windows inside the analysis region")
    return GeometricMetrics(
        rock_grid_count=float(rock_grid_count),
        slope_avg=float(samples.mean()),
        slope_variance=float(samples.var()),
    )


def _neighborhood_std(z: np.ndarray, known: np.ndarray) -> np.ndarray:
    """Std-dev of the known 3x3 neighborhood around each cell."""
    rows, cols = z.shape
    vals = np.where(known, z, 0.0)
    mask = known.astype(float)
    s1 = np.zeros((rows, cols))
    sv = np.zeros((rows, cols))
    sq = np.zeros((rows, cols))
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            src_r = slice(max(-dr, 0), rows - max(dr, 0))
            dst_r = slice(max(dr, 0), rows - max(-dr, 0))
            src_c = slice(max(-dc, 0), cols - max(dc, 0))
            dst_c = slice(max(dc, 0), cols - max(-dc, 0))
            s1[dst_r, dst_c] += mask[src_r, src_c]
            sv[dst_r, dst_c] += vals[src_r, src_c]
            sq[dst_r, dst_c] += (vals * vals)[src_r, src_c]
    out = np.zeros((rows, cols))
    ok = s1 > 0
    mean = np.where(ok, sv / np.maximum(s1, 1), 0.0)
    var = np.where(ok, sq / np.maximum(s1, 1) - mean * mean, 0.0)
    out[ok] = np.sqrt(np.maximum(var[ok], 0.0))
    return out


def threshold_classify(metrics: GeometricMetrics, thresholds: GeometricThresholds = GeometricThresholds(),
                       timestamp: float = 0.0) -> TerrainAssessment:
    """Classify from geometric metrics with hand-set thresholds.

    Slope decides first (challenging), then rough-cell count (rocky), else
    flat. Scores are normalized projections of the same metrics.
    """
    if metrics.slope_avg > thresholds.slope_avg_min_challenging:
        cls = TerrainClass.CHALLENGING
    elif metrics.rock_grid_count >= thresholds.rock_count_min_rocky:
        cls = TerrainClass.ROCKY
    else:
        cls = TerrainClass.FLAT
    rock = min(max(metrics.rock_grid_count / 1000.0, 0.0), 1.0)
    slope = min(max(metrics.slope_avg / 45.0, 0.0), 1.0)
    return TerrainAssessment(cls, rock, slope, timestamp)


# --- vision-language wire client -------------------------------------------


def default_prompt() -> str:
    return resources.files("rovernav").joinpath("data/prompt_template.txt").read_text(encoding="utf-8")


@dataclass(frozen=True)
class VlmConfig:
    endpoint_url: str
    timeout_s: float = 10.0
    api_key_env: str = "ROVERNAV_VLM_KEY"


_RESPONSE_FIELDS = {"terrain_class", "rock_complexity", "slope_complexity"}


def vlm_classify(image: bytes, prompt: str, config: VlmConfig, timestamp: float = 0.0,
                 api_key: str | None = None) -> TerrainAssessment:
    """Send an image + prompt to the configured endpoint, strictly parse.

    The response must be a JSON object with exactly the fields
    terrain_class ("flat"|"rocky"|"challenging"), rock_complexity and
    slope_complexity (numbers in [0, 1]). Anything else - extra fields,
    missing fields, wrong types, out-of-range values, non-JSON bodies -
    raises VlmSchemaError. Transport timeouts raise VlmTimeoutError; other
    transport failures raise VlmTransportError. No value is ever returned
    on a violation.
    """
    if not image:
        raise ValidationError("image payload is empty")
    body = json.dumps({
        "prompt": prompt,
        "image": base64.b64encode(image).decode("ascii"),
    }).encode("utf-8")
    headers = {"Content-Type": "application/json"}
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    req = urllib.request.Request(config.endpoint_url, data=body, headers=headers, method="POST")
    try:
        with urllib.request.urlopen(req, timeout=config.timeout_s) as resp:
            raw = resp.read()
    except socket.timeout as exc:
        raise VlmTimeoutError(f"endpoint timed out after {config.timeout_s}s") from exc
    except urllib.error.URLError as exc:
        if isinstance(getattr(exc, "reason", None), socket.timeout) or isinstance(exc, TimeoutError):
            raise VlmTimeoutError(f"endpoint timed out after {config.timeout_s}s") from exc
        raise VlmTransportError(f"endpoint request failed: {exc}") from exc
    except TimeoutError as exc:
        raise VlmTimeoutError(f"endpoint timed out after {config.timeout_s}s") from exc
    return parse_vlm_response(raw, timestamp)


def parse_vlm_response(raw: bytes | str, timestamp: float = 0.0) -> TerrainAssessment:
    """Validate the strict JSON assessment object."""
    try:
        data = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise VlmSchemaError(f"response is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise VlmSchemaError("response must be a JSON object")
    if set(data.keys()) != _RESPONSE_FIELDS:
        raise VlmSchemaError(f"response fields must be exactly {sorted(_RESPONSE_FIELDS)}")
    cls_raw = data["terrain_class"]
    if not isinstance(cls_raw, str):
        raise VlmSchemaError("terrain_class must be a string")
    try:
        cls = TerrainClass(cls_raw)
    except ValueError as exc:
        raise VlmSchemaError(f"unknown terrain_class {cls_raw!r}") from exc
    scores = {}
    for key in ("rock_complexity", "slope_complexity"):
        val = data[key]
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise VlmSchemaError(f"{key} must be a number")
        if not 0.0 <= float(val) <= 1.0:
            raise VlmSchemaError(f"{key}={val} outside [0, 1]")
        scores[key] = float(val)
    return TerrainAssessment(cls, scores["rock_complexity"], scores["slope_complexity"], timestamp)


def render_patch_image(patch: HeightField) -> bytes:
    """Shaded-relief rendering of a patch as binary graymap bytes.

    This is the simulated stand-in for a forward camera frame: a top-down
    hillshade of the sensed elevation, light from the north-west.
    """
    z = patch.elevation
    gy, gx = np.gradient(z, patch.cell_size)
    light = np.array([-0.5, 0.5, math.sqrt(0.5)])
    nz = 1.0 / np.sqrt(gx**2 + gy**2 + 1.0)
    shade = (-gx * light[0] - gy * light[1] + light[2]) * nz
    shade = np.clip((shade - shade.min()) / max(np.ptp(shade), 1e-9), 0.0, 1.0)
    pixels = (shade * 255).astype(np.uint8)
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii")
    return header + pixels.tobytes()


# --- deterministic mock ------------------------------------------------------

MOCK_JITTER = 0.05
SLOPE_SCORE_FULL_DEG = 45.0


def mock_classify(
    spec: TerrainSpec,
    ground: HeightField,
    position: tuple[float, float],
    seed: int,
    rule: ScoreRule = ScoreRule(),
    analysis_radius: float = 10.0,
    timestamp: float = 0.0,
) -> TerrainAssessment:
    """Deterministic assessment from the world's own generating parameters.

    The rock score is 9x the spec's rock coverage; the slope score is the
    local plane-fit inclination around `position` over 45 degrees. Both get
    seeded jitter of +/-0.05 (keyed on seed and the quantized position, so
    identical runs reproduce identical scores) and clamp to [0, 1]. The
    class always equals the rule applied to the emitted scores.
    """
    key = np.random.SeedSequence([
        seed & 0xFFFFFFFFFFFFFFFF,
        int(np.uint64(np.int64(round(position[0] * 16.0)))),
        int(np.uint64(np.int64(round(position[1] * 16.0)))),
        31,
    ])
    rng = np.random.default_rng(key)
    jit_rock, jit_slope = rng.uniform(-MOCK_JITTER, MOCK_JITTER, size=2)

    rock = min(max(ROCK_SCORE_GAIN * spec.rock_coverage + jit_rock, 0.0), 1.0)
    slope_deg = _local_slope(ground, position, analysis_radius)
    slope = min(max(slope_deg / SLOPE_SCORE_FULL_DEG + jit_slope, 0.0), 1.0)
    return TerrainAssessment(rule.classify(rock, slope), rock, slope, timestamp)


def _local_slope(ground: HeightField, position: tuple[float, float], radius: float) -> float:
    """Plane-fit slope (degrees) of the ground around a position."""
    n = 9
    span = np.linspace(-radius, radius, n)
    gx, gy = np.meshgrid(position[0] + span, position[1] + span)
    keep = (gx - position[0]) ** 2 + (gy - position[1]) ** 2 <= radius * radius
    xs = gx[keep]
    ys = gy[keep]
    zs = np.asarray(ground.sample(xs, ys), dtype=float)
    a, b, _ = plane_fit_points(np.column_stack([xs, ys, zs]))
    return float(slope_degrees(a, b))
