"""Sidewalk-edge inspection: find the painted curb strip, read its blocks,
and decide which ones need repainting.

The strip is the horizontal band with the strongest Mexican-Hat response.
Its blocks are averaged, every run of three consecutive blocks is encoded
as a ternary vector (+1 bright, -1 dark, 0 vague), and a three-neuron
Hopfield memory storing the two alternation patterns recalls the nearest
intact pattern. Blocks where the probe disagrees with the recalled pattern
are flagged for paint; overlapping segments vote, and any vote flags.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import BadThresholds, NonConvergent, NoStripFound
from .neural import HopfieldNet, hopfield_recall, hopfield_train
from .raster import Image, to_grayscale
from .vision import wavelet_response

# the two intact alternation patterns a three-block window can show
FUNDAMENTAL_PATTERNS = ((1, -1, 1), (-1, 1, -1))

INTACT = "intact"
PAINT = "paint"
UNRESOLVED = "unresolved"


def sidewalk_memory() -> HopfieldNet:
    """Three-neuron Hopfield net storing both alternation patterns."""
    return hopfield_train(FUNDAMENTAL_PATTERNS, 3)


@dataclass(frozen=True)
class Block:
    """One strip block: pixel rectangle plus mean intensity in [0, 1]."""

    x: int
    y: int
    width: int
    height: int
    mean: float


@dataclass(frozen=True)
class BlockStrip:
    """Contiguous blocks of the located band, left to right."""

    blocks: tuple
    source_width: int
    source_height: int
    band_top: int

    def means(self) -> list[float]:
        return [b.mean for b in self.blocks]


@dataclass(frozen=True)
class SegmentPattern:
    """Three consecutive block means starting at a block offset."""

    start: int
    means: tuple

    def __post_init__(self):
        if len(self.means) != 3:
            raise ValueError("a segment holds exactly three blocks")


@dataclass(frozen=True)
class PaintDecision:
    """Verdict for one segment; paint_blocks holds global block indices."""

    start: int
    encoded: tuple
    vertex: tuple | None
    verdict: str
    paint_blocks: tuple = ()

    def to_dict(self) -> dict:
        return {
            "start": self.start,
            "encoded": list(self.encoded),
            "vertex": list(self.vertex) if self.vertex is not None else None,
            "verdict": self.verdict,
            "paint_blocks": list(self.paint_blocks),
        }


@dataclass(frozen=True)
class InspectConfig:
    sigma: float = 2.0
    block_length: int = 8
    bright_min: float = 0.7
    dark_max: float = 0.3
    min_response: float = 1.0  # mean |wavelet response| floor for the band
    max_iter: int = 10


@dataclass(frozen=True)
class InspectionReport:
    decisions: tuple
    flagged_blocks: tuple
    band_top: int
    block_length: int
    n_blocks: int

    def to_dict(self) -> dict:
        return {
            "band_top": self.band_top,
            "block_length": self.block_length,
            "n_blocks": self.n_blocks,
            "segments": [d.to_dict() for d in self.decisions],
            "flagged_blocks": list(self.flagged_blocks),
        }


def extract_strip(img: Image, sigma: float = 2.0, block_length: int = 8,
                  min_response: float = 1.0) -> BlockStrip:
    """Locate the band with the strongest wavelet response and split it.

    The band is block_length rows tall; the window of rows maximizing the
    summed |response| wins. Raises NoStripFound when the winner's mean
    |response| per pixel stays under min_response (flat images).
    """
    gray = to_grayscale(img)
    if gray.height <= block_length or gray.width < block_length:
        raise ValueError("image smaller than one block")
    response = wavelet_response(gray, sigma)
    row_strength = np.abs(response.values).sum(axis=1)
    window = np.convolve(row_strength, np.ones(block_length), mode="valid")
    top = int(np.argmax(window))
    if window[top] / (block_length * gray.width) < min_response:
        raise NoStripFound(f"best band response {window[top]:.3g} under the floor")

    arr = gray.to_array().astype(np.float64)
    band = arr[top:top + block_length]
    blocks = []
    for j in range(gray.width // block_length):
        x0 = j * block_length
        mean = float(band[:, x0:x0 + block_length].mean() / 255.0)
        blocks.append(Block(x0, top, block_length, block_length, mean))
    return BlockStrip(tuple(blocks), gray.width, gray.height, top)


def encode_ternary(segment: SegmentPattern, bright_min: float = 0.7,
                   dark_max: float = 0.3) -> tuple:
    """Map the three block means to {+1 bright, -1 dark, 0 vague}."""
    if not 0.0 <= dark_max < bright_min <= 1.0:
        raise BadThresholds(f"dark_max {dark_max}, bright_min {bright_min}")
    out = []
    for mean in segment.means:
        if mean >= bright_min:
            out.append(1)
        elif mean <= dark_max:
            out.append(-1)
        else:
            out.append(0)
    return tuple(out)


def classify_segment(encoded, net: HopfieldNet, start: int = 0,
                     max_iter: int = 10) -> PaintDecision:
    """Recall the nearest stored pattern and flag the disagreeing blocks."""
    encoded = tuple(int(v) for v in encoded)
    if encoded in net.stored_patterns:
        return PaintDecision(start, encoded, encoded, INTACT)
    try:
        state, _ = hopfield_recall(net, encoded, max_iter=max_iter)
    except NonConvergent:
        return PaintDecision(start, encoded, None, UNRESOLVED)
    vertex = tuple(int(v) for v in state)
    mismatched = tuple(start + i for i in range(3) if encoded[i] != vertex[i])
    return PaintDecision(start, encoded, vertex, PAINT, mismatched)


def inspect(img: Image, config: InspectConfig = InspectConfig()) -> tuple[InspectionReport, Image]:
    """Full pipeline over one image; returns the report and an overlay.

    A stride-1 window turns blocks into overlapping three-block segments;
    every segment is classified independently and a block is flagged when
    any covering segment votes for it. Flagged blocks are outlined at 255
    in a grayscale copy of the source.
    """
    strip = extract_strip(img, config.sigma, config.block_length, config.min_response)
    net = sidewalk_memory()
    means = strip.means()
    decisions = []
    flagged = set()
    for start in range(len(means) - 2):
        segment = SegmentPattern(start, tuple(means[start:start + 3]))
        encoded = encode_ternary(segment, config.bright_min, config.dark_max)
        decision = classify_segment(encoded, net, start=start, max_iter=config.max_iter)
        decisions.append(decision)
        flagged.update(decision.paint_blocks)

    overlay_arr = to_grayscale(img).to_array().copy()
    for idx in flagged:
        b = strip.blocks[idx]
        overlay_arr[b.y, b.x:b.x + b.width] = 255
        overlay_arr[b.y + b.height - 1, b.x:b.x + b.width] = 255
        overlay_arr[b.y:b.y + b.height, b.x] = 255
        overlay_arr[b.y:b.y + b.height, b.x + b.width - 1] = 255
    overlay = Image.from_array(overlay_arr)

    report = InspectionReport(tuple(decisions), tuple(sorted(flagged)),
                              strip.band_top, config.block_length, len(strip.blocks))
    return report, overlay


# Synthetic ground truth -------------------------------------------------------

@dataclass(frozen=True)
class SidewalkParams:
    """Generator settings for a striped curb with known erased blocks."""

    n_blocks: int = 12
    block_length: int = 8
    image_height: int = 48
    band_top: int = 16
    bright: int = 230
    dark: int = 25
    background: int = 128  # erased blocks fall back to this level
    noise_sigma: float = 0.0
    erased_blocks: tuple = field(default_factory=tuple)
    first_block_bright: bool = True

    @classmethod
    def from_json(cls, text: str) -> "SidewalkParams":
        doc = json.loads(text)
        doc["erased_blocks"] = tuple(doc.get("erased_blocks", ()))
        return cls(**doc)

    def to_json(self) -> str:
        doc = dict(self.__dict__)
        doc["erased_blocks"] = list(self.erased_blocks)
        return json.dumps(doc, indent=2)


def generate_sidewalk(params: SidewalkParams, seed: int = 0) -> Image:
    """Render a striped band on a flat background, with erased blocks and noise."""
    width = params.n_blocks * params.block_length
    arr = np.full((params.image_height, width), params.background, dtype=np.float64)
    for j in range(params.n_blocks):
        bright = (j % 2 == 0) == params.first_block_bright
        value = params.background if j in params.erased_blocks else (
            params.bright if bright else params.dark)
        x0 = j * params.block_length
        arr[params.band_top:params.band_top + params.block_length,
            x0:x0 + params.block_length] = value
    if params.noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        arr += rng.normal(0.0, params.noise_sigma, size=arr.shape)
    arr = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    return Image.from_array(arr)
