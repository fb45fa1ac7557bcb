"""Classical vision primitives and the thermal radiance conversion.

Covers Otsu thresholding, excess-green vegetation density, the Mexican-Hat
wavelet, Hough line/circle voting, a real Gabor filter bank with PCA, and
the blackbody power/temperature pair. All convolutions reflect-pad so flat
borders stay response-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    BadRadiusRange,
    DegenerateHistogram,
    EmptyBank,
    NegativeRadiance,
    NonPositiveSigma,
    NotGrayscale,
    NotRGB,
    ZeroVariance,
)
from .raster import Histogram, Image

# Total-emission blackbody constant, W m^-2 K^-4. The two spectral windows
# usually sampled by long-wave (8-14 um) and mid-wave (3-5 um) cameras are
# descriptive metadata only; conversion always uses total emission.
STEFAN_BOLTZMANN = 5.67e-8
THERMAL_BANDS_UM = {"long-wave": (8.0, 14.0), "mid-wave": (3.0, 5.0)}

DEFAULT_EXG_THRESHOLD = 20


@dataclass(frozen=True)
class ResponseMap:
    """Signed per-pixel filter responses (wavelet or Gabor)."""

    width: int
    height: int
    values: np.ndarray  # float64, shape (height, width)

    def __post_init__(self):
        if self.values.shape != (self.height, self.width):
            raise ValueError(f"values shaped {self.values.shape}, expected {(self.height, self.width)}")

    def to_pgm_image(self) -> Image:
        """Min-max scale to 0..255 for visual inspection; flat maps go black."""
        lo, hi = float(self.values.min()), float(self.values.max())
        if hi == lo:
            return Image.from_array(np.zeros((self.height, self.width), dtype=np.uint8))
        scaled = np.floor((self.values - lo) / (hi - lo) * 255.0 + 0.5)
        return Image.from_array(scaled.astype(np.uint8))


class LineHit(NamedTuple):
    rho: float
    theta: float  # degrees in [0, 180)
    votes: int


class CircleHit(NamedTuple):
    cx: int
    cy: int
    radius: int
    votes: int


class GreenDensity(NamedTuple):
    fraction: float
    mask: Image  # 255 where the pixel counted as green


@dataclass(frozen=True)
class GaborParams:
    """Real Gabor kernel parameters: cosine carrier under a rotated Gaussian."""

    wavelength: float        # carrier period, pixels
    orientation: float       # radians
    sigma: float             # Gaussian envelope scale, pixels
    aspect: float = 0.5      # envelope ellipticity gamma
    phase: float = 0.0       # carrier phase psi, radians

    def __post_init__(self):
        if self.wavelength <= 0 or self.sigma <= 0 or self.aspect <= 0:
            raise ValueError("wavelength, sigma, and aspect must be positive")


def default_gabor_bank(wavelength: float = 8.0, sigma: float = 4.0) -> list[GaborParams]:
    """Four-orientation bank (0, 45, 90, 135 degrees) at one scale."""
    return [GaborParams(wavelength, i * math.pi / 4, sigma) for i in range(4)]


# Otsu --------------------------------------------------------------------

def otsu_threshold(hist: Histogram) -> int:
    """Threshold maximizing between-class variance; ties go to the lowest t.

    The split is {levels <= t} vs {levels > t}. Scores are compared in exact
    integer arithmetic so the argmax never depends on float rounding:
    with class counts n0, n1 and sums s0, s1, between-class variance is
    proportional to (s0*n1 - s1*n0)^2 / (n0*n1).
    """
    bins = hist.bins
    total = sum(bins)
    if total == 0:
        raise ValueError("histogram is empty")
    nonzero = [v for v in range(256) if bins[v] > 0]
    if len(nonzero) == 1:
        raise DegenerateHistogram(nonzero[0])

    total_sum = sum(v * bins[v] for v in range(256))
    best_t = 0
    best_num, best_den = -1, 1  # score as exact fraction best_num/best_den
    n0 = 0
    s0 = 0
    for t in range(256):
        n0 += bins[t]
        s0 += t * bins[t]
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        s1 = total_sum - s0
        num = (s0 * n1 - s1 * n0) ** 2
        den = n0 * n1
        # num/den > best_num/best_den, exactly
        if num * best_den > best_num * den:
            best_num, best_den = num, den
            best_t = t
    return best_t


# Excess green -------------------------------------------------------------

def green_density(img: Image, exg_threshold: int = DEFAULT_EXG_THRESHOLD) -> GreenDensity:
    """Fraction of pixels with excess-green index 2G - R - B above the threshold."""
    if img.channels != 3:
        raise NotRGB("green density requires an RGB image")
    rgb = img.to_array().astype(np.int32)
    exg = 2 * rgb[:, :, 1] - rgb[:, :, 0] - rgb[:, :, 2]
    green = exg > exg_threshold
    fraction = float(np.count_nonzero(green)) / (img.width * img.height)
    mask = Image.from_array(np.where(green, 255, 0).astype(np.uint8))
    return GreenDensity(fraction, mask)


# Mexican-Hat wavelet --------------------------------------------------------

def mexican_hat_kernel(sigma: float, radius: int | None = None) -> ResponseMap:
    """Square (1 - r^2/2s^2)exp(-r^2/2s^2) kernel, mean-shifted to sum to zero.

    The zero sum makes constant regions vanish under convolution. Radius
    defaults to ceil(4*sigma), which captures the full ripple.
    """
    if sigma <= 0:
        raise NonPositiveSigma(f"sigma {sigma}")
    if radius is None:
        radius = math.ceil(4 * sigma)
    if radius < 1:
        raise ValueError("radius must be >= 1")
    offs = np.arange(-radius, radius + 1, dtype=np.float64)
    r2 = offs[:, None] ** 2 + offs[None, :] ** 2
    u = r2 / (2.0 * sigma * sigma)
    kernel = (1.0 - u) * np.exp(-u)
    kernel -= kernel.mean()
    side = 2 * radius + 1
    return ResponseMap(side, side, kernel)


def _reflect_convolve(arr: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """2-D convolution with edge-repeating reflect padding."""
    kh, kw = kernel.shape
    ry, rx = kh // 2, kw // 2
    padded = np.pad(arr, ((ry, ry), (rx, rx)), mode="symmetric")
    windows = np.lib.stride_tricks.sliding_window_view(padded, (kh, kw))
    # convolution flips the kernel; symmetric kernels are unaffected
    flipped = kernel[::-1, ::-1]
    return np.einsum("ijkl,kl->ij", windows, flipped)


def wavelet_response(img: Image, sigma: float, radius: int | None = None) -> ResponseMap:
    """Signed Mexican-Hat coefficient array of a gray image."""
    if img.channels != 1:
        raise NotGrayscale("wavelet response requires a gray image")
    kernel = mexican_hat_kernel(sigma, radius)
    values = _reflect_convolve(img.to_array().astype(np.float64), kernel.values)
    return ResponseMap(img.width, img.height, values)


# Hough voting ---------------------------------------------------------------

def hough_lines(edges: Image, theta_step: float = 1.0, threshold: int = 1) -> list[LineHit]:
    """Line hits from a binary edge image (edge pixels are 255).

    rho is accumulated at 1-pixel resolution over x cos(theta) + y sin(theta),
    theta over [0, 180) at theta_step degrees. Cells with >= threshold votes
    are returned sorted by votes descending.
    """
    if edges.channels != 1:
        raise NotGrayscale("edge image must be gray")
    if theta_step <= 0 or (180.0 / theta_step) != round(180.0 / theta_step):
        raise ValueError(f"theta_step {theta_step} must divide 180")
    arr = edges.to_array()
    ys, xs = np.nonzero(arr == 255)
    if len(xs) == 0:
        return []
    n_theta = int(round(180.0 / theta_step))
    thetas = np.arange(n_theta) * theta_step
    rad = np.deg2rad(thetas)
    diag = int(math.ceil(math.hypot(edges.width - 1, edges.height - 1)))
    exact = xs[:, None] * np.cos(rad)[None, :] + ys[:, None] * np.sin(rad)[None, :]
    rhos = np.rint(exact).astype(np.int64)
    acc = np.zeros((2 * diag + 1, n_theta), dtype=np.int64)
    # residual distance to the bin center ranks equal-vote cells: the theta
    # whose evidence is most concentrated describes the pixels best
    spread = np.zeros_like(acc, dtype=np.float64)
    flat = (rhos + diag) * n_theta + np.arange(n_theta)[None, :]
    np.add.at(acc.reshape(-1), flat.ravel(), 1)
    np.add.at(spread.reshape(-1), flat.ravel(), np.abs(exact - rhos).ravel())
    hits = []
    order = []
    for ri, ti in zip(*np.nonzero(acc >= threshold)):
        hits.append(LineHit(float(ri - diag), float(thetas[ti]), int(acc[ri, ti])))
        order.append(float(spread[ri, ti]))
    ranked = sorted(zip(hits, order), key=lambda p: (-p[0].votes, p[1], p[0].rho, p[0].theta))
    return [h for h, _ in ranked]


def hough_circles(edges: Image, r_min: int, r_max: int, threshold: int = 1,
                  angle_step: float = 1.0) -> list[CircleHit]:
    """Circle hits via a (cx, cy, r) accumulator.

    Every edge pixel casts one vote per radius into each distinct center cell
    reached along directions sampled at angle_step degrees, so a hit's votes
    count supporting edge pixels. Cells with >= threshold votes are returned
    sorted by votes descending.
    """
    if edges.channels != 1:
        raise NotGrayscale("edge image must be gray")
    if not 0 < r_min <= r_max:
        raise BadRadiusRange(f"r_min {r_min}, r_max {r_max}")
    arr = edges.to_array()
    ys, xs = np.nonzero(arr == 255)
    if len(xs) == 0:
        return []
    w, h = edges.width, edges.height
    angles = np.deg2rad(np.arange(0.0, 360.0, angle_step))
    cos_a, sin_a = np.cos(angles), np.sin(angles)
    hits = []
    for r in range(r_min, r_max + 1):
        acc = np.zeros((h, w), dtype=np.int64)
        dx = np.rint(r * cos_a).astype(np.int64)
        dy = np.rint(r * sin_a).astype(np.int64)
        for x, y in zip(xs, ys):
            cx = x - dx
            cy = y - dy
            ok = (cx >= 0) & (cx < w) & (cy >= 0) & (cy < h)
            cells = np.unique(cy[ok] * w + cx[ok])  # one vote per pixel per cell
            acc.reshape(-1)[cells] += 1
        for cy_i, cx_i in zip(*np.nonzero(acc >= threshold)):
            hits.append(CircleHit(int(cx_i), int(cy_i), r, int(acc[cy_i, cx_i])))
    hits.sort(key=lambda c: (-c.votes, c.cx, c.cy, c.radius))
    return hits


def line_hits_csv(hits: list[LineHit]) -> str:
    rows = ["rho,theta,votes"]
    rows += [f"{h.rho:g},{h.theta:g},{h.votes}" for h in hits]
    return "\n".join(rows) + "\n"


def circle_hits_csv(hits: list[CircleHit]) -> str:
    rows = ["cx,cy,r,votes"]
    rows += [f"{h.cx},{h.cy},{h.radius},{h.votes}" for h in hits]
    return "\n".join(rows) + "\n"


# Gabor + PCA ----------------------------------------------------------------

def gabor_kernel(p: GaborParams) -> np.ndarray:
    """Sampled real Gabor kernel, mean-shifted so flat regions give no response."""
    sigma_x = p.sigma
    sigma_y = p.sigma / p.aspect
    radius = max(1, math.ceil(3.0 * max(sigma_x, sigma_y)))
    offs = np.arange(-radius, radius + 1, dtype=np.float64)
    yy, xx = np.meshgrid(offs, offs, indexing="ij")
    c, s = math.cos(p.orientation), math.sin(p.orientation)
    x_rot = xx * c + yy * s
    y_rot = -xx * s + yy * c
    kernel = np.exp(-(x_rot ** 2 + (p.aspect * y_rot) ** 2) / (2.0 * p.sigma ** 2))
    kernel *= np.cos(2.0 * math.pi * x_rot / p.wavelength + p.phase)
    kernel -= kernel.mean()
    return kernel


def gabor_bank(img: Image, params: list[GaborParams]) -> list[ResponseMap]:
    """Response map per bank member, reflect-padded."""
    if img.channels != 1:
        raise NotGrayscale("gabor bank requires a gray image")
    if not params:
        raise EmptyBank("bank has no parameter sets")
    arr = img.to_array().astype(np.float64)
    maps = []
    for p in params:
        values = _reflect_convolve(arr, gabor_kernel(p))
        maps.append(ResponseMap(img.width, img.height, values))
    return maps


def _jacobi_eigh(matrix: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Adequate for patch-sized covariance matrices; returns (eigenvalues,
    eigenvectors as columns) in descending eigenvalue order.
    """
    a = matrix.astype(np.float64).copy()
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = math.sqrt(max(0.0, (a * a).sum() - (np.diag(a) ** 2).sum()))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= tol * scale / (n * n):
                    continue
                # rotation angle zeroing a[p, q]
                theta = 0.5 * math.atan2(2.0 * apq, a[q, q] - a[p, p])
                c, s = math.cos(theta), math.sin(theta)
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    order = np.argsort(np.diag(a))[::-1]
    return np.diag(a)[order], v[:, order]


def pca_project(vectors: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-k principal components of row vectors and the projected rows.

    Components are the descending-eigenvalue eigenvectors of the
    mean-centered covariance, returned as orthonormal rows with the
    largest-magnitude entry made positive for a deterministic sign.
    """
    data = np.asarray(vectors, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 2:
        raise ValueError("need a matrix of at least 2 vectors")
    n, dim = data.shape
    if not 1 <= k <= dim:
        raise ValueError(f"k {k} outside 1..{dim}")
    centered = data - data.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    if not cov.any():
        raise ZeroVariance("all vectors are identical")
    _, eigvecs = _jacobi_eigh(cov)
    components = eigvecs[:, :k].T.copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    projected = centered @ components.T
    return components, projected


# Thermal --------------------------------------------------------------------

def radiance_to_temperature(power_density: float) -> float:
    """Blackbody temperature giving the emitted power density: T = (P/sigma)^(1/4)."""
    if power_density < 0:
        raise NegativeRadiance(f"power density {power_density}")
    return (power_density / STEFAN_BOLTZMANN) ** 0.25


def temperature_to_radiance(temperature_k: float) -> float:
    """Total emitted power density sigma*T^4 of a blackbody at T kelvin."""
    if temperature_k < 0:
        raise ValueError(f"temperature {temperature_k} below absolute zero")
    return STEFAN_BOLTZMANN * temperature_k ** 4
