"""The four image descriptors: CDH, LBP, CLD and EOH.

All extractors are pure functions on an H x W x 3 uint8 RGB array and
return float64 vectors of fixed length:

    CDH  108  color-difference histogram in L*a*b* (90 color + 18 orientation bins)
    LBP  256  local binary pattern code histogram (P=8, R=1)
    CLD   12  block-DCT color layout (6 Y + 3 Cb + 3 Cr zigzag coefficients)
    EOH    5  dominant edge-orientation histogram (Sobel-family masks)

Histogram descriptors (CDH, LBP, EOH) are L1-normalized; when an image
produces no counts at all (flat field) the histogram falls back to the
uniform distribution so downstream distances stay well defined.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.fft import dctn

CDH_DIM = 108
LBP_DIM = 256
CLD_DIM = 12
EOH_DIM = 5
TOTAL_DIM = CDH_DIM + LBP_DIM + CLD_DIM + EOH_DIM

# CDH quantization: L in [0,100] -> 10 bins, a and b in [-128,128) -> 3 bins each,
# edge orientation in [0,360) -> 18 sectors of 20 degrees.
CDH_L_BINS = 10
CDH_A_BINS = 3
CDH_B_BINS = 3
CDH_ORI_BINS = 18
CDH_AB_RANGE = 128.0

# CLD: 8x8 grid of block-mean colors, zigzag-truncated DCT coefficients.
CLD_GRID = 8
CLD_N_Y = 6
CLD_N_CB = 3
CLD_N_CR = 3
CLD_WEIGHTS_Y = (2.0, 2.0, 2.0, 1.0, 1.0, 1.0)
CLD_WEIGHTS_CB = (2.0, 1.0, 1.0)
CLD_WEIGHTS_CR = (2.0, 1.0, 1.0)

# EOH response threshold on the 0..255 gradient scale.
EOH_TAU = 11.0

SOBEL_V = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_H = SOBEL_V.T.copy()
SOBEL_45 = np.array([[0, 1, 2], [-1, 0, 1], [-2, -1, 0]], dtype=np.float64)
SOBEL_135 = np.array([[2, 1, 0], [1, 0, -1], [0, -1, -2]], dtype=np.float64)
ISOTROPIC = np.array([[-1, -1, -1], [-1, 8, -1], [-1, -1, -1]], dtype=np.float64)

# (mask, sum of positive coefficients) in bin order: vertical, horizontal,
# 45 degree, 135 degree, non-directional.
EOH_MASKS = (
    (SOBEL_V, 4.0),
    (SOBEL_H, 4.0),
    (SOBEL_45, 4.0),
    (SOBEL_135, 4.0),
    (ISOTROPIC, 8.0),
)


@dataclass(frozen=True)
class LbpParams:
    """Neighborhood geometry of the LBP operator."""

    points: int = 8
    radius: float = 1.0


@dataclass
class DescriptorSet:
    """The four feature vectors of one image."""

    cdh: np.ndarray
    lbp: np.ndarray
    cld: np.ndarray
    eoh: np.ndarray

    def __post_init__(self):
        self.cdh = np.asarray(self.cdh, dtype=np.float64)
        self.lbp = np.asarray(self.lbp, dtype=np.float64)
        self.cld = np.asarray(self.cld, dtype=np.float64)
        self.eoh = np.asarray(self.eoh, dtype=np.float64)
        if (len(self.cdh), len(self.lbp), len(self.cld), len(self.eoh)) != (
            CDH_DIM,
            LBP_DIM,
            CLD_DIM,
            EOH_DIM,
        ):
            raise ValueError("descriptor vector has wrong dimension")

    def vectors(self):
        return (self.cdh, self.lbp, self.cld, self.eoh)

    def concat(self):
        """All four vectors stacked into one 381-dim feature vector."""
        return np.concatenate(self.vectors())

    @classmethod
    def from_concat(cls, vec):
        """Rebuild the four vectors from one 381-dim concatenation."""
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (TOTAL_DIM,):
            raise ValueError(f"expected {TOTAL_DIM} values, got shape {vec.shape}")
        cdh, lbp, cld, eoh = np.split(
            vec, [CDH_DIM, CDH_DIM + LBP_DIM, CDH_DIM + LBP_DIM + CLD_DIM]
        )
        return cls(cdh=cdh, lbp=lbp, cld=cld, eoh=eoh)


DESCRIPTOR_NAMES = ("cdh", "lbp", "cld", "eoh")
DESCRIPTOR_DIMS = (CDH_DIM, LBP_DIM, CLD_DIM, EOH_DIM)


def _check_rgb(pixels):
    pixels = np.asarray(pixels)
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ValueError("expected an H x W x 3 RGB array")
    if pixels.shape[0] < 3 or pixels.shape[1] < 3:
        raise ValueError("image too small for 3x3 neighborhoods")
    return pixels.astype(np.float64)


def rgb_to_gray(pixels):
    """ITU-R BT.601 luma, float64 in [0, 255]."""
    p = np.asarray(pixels, dtype=np.float64)
    return 0.299 * p[..., 0] + 0.587 * p[..., 1] + 0.114 * p[..., 2]


def rgb_to_lab(pixels):
    """sRGB (D65) to CIE L*a*b*, vectorized over the trailing RGB axis."""
    c = np.asarray(pixels, dtype=np.float64) / 255.0
    linear = np.where(c > 0.04045, ((c + 0.055) / 1.055) ** 2.4, c / 12.92)
    r, g, b = linear[..., 0], linear[..., 1], linear[..., 2]
    x = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / 0.95047
    y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b
    z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / 1.08883

    eps = (6.0 / 29.0) ** 3

    def f(t):
        return np.where(t > eps, np.cbrt(t), t / (3 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)

    fx, fy, fz = f(x), f(y), f(z)
    lab = np.empty(c.shape, dtype=np.float64)
    lab[..., 0] = 116.0 * fy - 16.0
    lab[..., 1] = 500.0 * (fx - fy)
    lab[..., 2] = 200.0 * (fy - fz)
    return lab


def rgb_to_ycbcr(pixels):
    """BT.601 full-range YCbCr of a float RGB array in [0, 255]."""
    p = np.asarray(pixels, dtype=np.float64)
    r, g, b = p[..., 0], p[..., 1], p[..., 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    return y, cb, cr


def _normalize_hist(hist, dim):
    total = hist.sum()
    if total <= 0.0:
        return np.full(dim, 1.0 / dim)
    return hist / total


def quantize_lab(lab):
    """Map L*a*b* values to the 90 CDH color bin indices."""
    l_idx = np.clip(
        np.floor(lab[..., 0] * (CDH_L_BINS / 100.0)), 0, CDH_L_BINS - 1
    ).astype(np.intp)
    a_idx = np.clip(
        np.floor((lab[..., 1] + CDH_AB_RANGE) * (CDH_A_BINS / (2 * CDH_AB_RANGE))),
        0,
        CDH_A_BINS - 1,
    ).astype(np.intp)
    b_idx = np.clip(
        np.floor((lab[..., 2] + CDH_AB_RANGE) * (CDH_B_BINS / (2 * CDH_AB_RANGE))),
        0,
        CDH_B_BINS - 1,
    ).astype(np.intp)
    return (l_idx * CDH_A_BINS + a_idx) * CDH_B_BINS + b_idx


def edge_orientation_bins(channel, n_bins=CDH_ORI_BINS):
    """Quantized Sobel gradient direction for interior pixels of a 2-D array."""
    gx = ndimage.correlate(channel, SOBEL_V, mode="nearest")[1:-1, 1:-1]
    gy = ndimage.correlate(channel, SOBEL_H, mode="nearest")[1:-1, 1:-1]
    theta = np.mod(np.arctan2(gy, gx), 2.0 * np.pi)
    return np.clip((theta * (n_bins / (2.0 * np.pi))).astype(np.intp), 0, n_bins - 1)


def compute_cdh(pixels):
    """Color difference histogram in L*a*b* space.

    Neighboring interior pixels (4-neighborhood, counted once as right and
    down pairs) contribute their Euclidean L*a*b* difference to the shared
    color bin when their quantized colors agree, and to the shared
    orientation bin when their quantized Sobel edge orientations agree.
    """
    pixels = _check_rgb(pixels)
    lab = rgb_to_lab(pixels)
    color = quantize_lab(lab)[1:-1, 1:-1]
    ori = edge_orientation_bins(lab[..., 0])
    lab_in = lab[1:-1, 1:-1, :]

    hist = np.zeros(CDH_DIM)
    for axis in (0, 1):
        if lab_in.shape[axis] < 2:
            continue
        if axis == 0:
            a_sl, b_sl = (slice(None, -1), slice(None)), (slice(1, None), slice(None))
        else:
            a_sl, b_sl = (slice(None), slice(None, -1)), (slice(None), slice(1, None))
        diff = lab_in[a_sl] - lab_in[b_sl]
        de = np.sqrt((diff * diff).sum(axis=-1))
        c_a, c_b = color[a_sl], color[b_sl]
        same_color = c_a == c_b
        hist[:90] += np.bincount(
            c_a[same_color], weights=de[same_color], minlength=90
        )
        o_a, o_b = ori[a_sl], ori[b_sl]
        same_ori = o_a == o_b
        hist[90:] += np.bincount(
            o_a[same_ori], weights=de[same_ori], minlength=CDH_ORI_BINS
        )
    return _normalize_hist(hist, CDH_DIM)


def _bilinear_sample(gray, margin, dy, dx):
    """Shifted view of the interior, bilinearly interpolated at (dy, dx).

    Uses the lerp form a + t*(b - a) so that samples over locally constant
    regions reproduce the pixel value exactly.
    """
    h, w = gray.shape

    def block(oy, ox):
        return gray[margin + oy : h - margin + oy, margin + ox : w - margin + ox]

    y0, x0 = int(np.floor(dy)), int(np.floor(dx))
    fy, fx = dy - y0, dx - x0
    if fx == 0.0 and fy == 0.0:
        return block(y0, x0)
    top = block(y0, x0) + fx * (block(y0, x0 + 1) - block(y0, x0))
    bot = block(y0 + 1, x0) + fx * (block(y0 + 1, x0 + 1) - block(y0 + 1, x0))
    return top + fy * (bot - top)


def lbp_codes(gray, params=LbpParams()):
    """LBP code of every interior pixel of a 2-D grayscale array.

    Neighbor p sits at angle 2*pi*p/P and radius R, sampled bilinearly;
    its sign bit is 1 when the sample is >= the center value.
    """
    gray = np.asarray(gray, dtype=np.float64)
    p_count, radius = params.points, params.radius
    margin = int(np.ceil(radius))
    if gray.shape[0] <= 2 * margin or gray.shape[1] <= 2 * margin:
        raise ValueError("image too small for the LBP neighborhood")
    center = gray[margin:-margin, margin:-margin]
    codes = np.zeros(center.shape, dtype=np.int64)
    for p in range(p_count):
        angle = 2.0 * np.pi * p / p_count
        dx = radius * np.cos(angle)
        dy = -radius * np.sin(angle)
        # snap near-integer offsets so cardinal neighbors are sampled exactly
        if abs(dx - round(dx)) < 1e-8:
            dx = float(round(dx))
        if abs(dy - round(dy)) < 1e-8:
            dy = float(round(dy))
        sample = _bilinear_sample(gray, margin, dy, dx)
        codes += (sample >= center).astype(np.int64) << p
    return codes


def compute_lbp(pixels, params=LbpParams()):
    """L1-normalized histogram of LBP codes (2^P bins) of the BT.601 luma."""
    pixels = _check_rgb(pixels)
    codes = lbp_codes(rgb_to_gray(pixels), params)
    n_bins = 1 << params.points
    hist = np.bincount(codes.ravel(), minlength=n_bins).astype(np.float64)
    return _normalize_hist(hist, n_bins)


def zigzag_indices(n):
    """(row, col) index pairs of an n x n matrix in JPEG zigzag order."""
    order = []
    for s in range(2 * n - 1):
        if s % 2 == 1:  # walk down-left from the top edge
            rows = range(max(0, s - n + 1), min(s, n - 1) + 1)
        else:  # walk up-right from the left edge
            rows = range(min(s, n - 1), max(0, s - n + 1) - 1, -1)
        order.extend((r, s - r) for r in rows)
    idx = np.array(order, dtype=np.intp)
    return idx[:, 0], idx[:, 1]


def _block_means(channel, grid):
    h, w = channel.shape
    ys = np.round(np.linspace(0, h, grid + 1)).astype(int)
    xs = np.round(np.linspace(0, w, grid + 1)).astype(int)
    out = np.empty((grid, grid))
    for i in range(grid):
        for j in range(grid):
            out[i, j] = channel[ys[i] : ys[i + 1], xs[j] : xs[j + 1]].mean()
    return out


def compute_cld(pixels):
    """Color layout descriptor: truncated zigzag DCT of the 8x8 block-mean grid."""
    pixels = _check_rgb(pixels)
    grid = np.stack(
        [_block_means(pixels[..., ch], CLD_GRID) for ch in range(3)], axis=-1
    )
    y, cb, cr = rgb_to_ycbcr(grid)
    rows, cols = zigzag_indices(CLD_GRID)
    out = []
    for channel, keep in ((y, CLD_N_Y), (cb, CLD_N_CB), (cr, CLD_N_CR)):
        coeffs = dctn(channel, norm="ortho")
        out.append(coeffs[rows, cols][:keep])
    return np.concatenate(out)


def cld_distance(cld1, cld2, wy=CLD_WEIGHTS_Y, wb=CLD_WEIGHTS_CB, wr=CLD_WEIGHTS_CR):
    """Weighted per-channel CLD distance between two 12-dim descriptors."""
    cld1 = np.asarray(cld1, dtype=np.float64)
    cld2 = np.asarray(cld2, dtype=np.float64)
    splits = (CLD_N_Y, CLD_N_Y + CLD_N_CB)
    d1y, d1b, d1r = np.split(cld1, splits)
    d2y, d2b, d2r = np.split(cld2, splits)
    return (
        np.sqrt(np.sum(np.asarray(wy) * (d1y - d2y) ** 2))
        + np.sqrt(np.sum(np.asarray(wb) * (d1b - d2b) ** 2))
        + np.sqrt(np.sum(np.asarray(wr) * (d1r - d2r) ** 2))
    )


def eoh_responses(gray):
    """Per-mask absolute edge responses on the 0..255 scale, interior pixels."""
    gray = np.asarray(gray, dtype=np.float64)
    return np.stack(
        [
            np.abs(ndimage.correlate(gray, mask, mode="nearest")[1:-1, 1:-1]) / gain
            for mask, gain in EOH_MASKS
        ]
    )


def compute_eoh(pixels, tau=EOH_TAU, block_based=False):
    """Histogram of dominant edge orientations.

    Every interior pixel whose strongest mask response reaches tau votes for
    that mask's bin.  The default is the global 5-bin histogram; the
    block-based variant splits the image into a 4x4 grid and concatenates
    per-block histograms (80 bins, each block carrying 1/16 of the mass).
    """
    pixels = _check_rgb(pixels)
    responses = eoh_responses(rgb_to_gray(pixels))
    strongest = responses.argmax(axis=0)
    keep = responses.max(axis=0) >= tau
    if not block_based:
        hist = np.bincount(strongest[keep].ravel(), minlength=EOH_DIM).astype(
            np.float64
        )
        return _normalize_hist(hist, EOH_DIM)
    h, w = strongest.shape
    ys = np.round(np.linspace(0, h, 5)).astype(int)
    xs = np.round(np.linspace(0, w, 5)).astype(int)
    parts = []
    for i in range(4):
        for j in range(4):
            blk_bins = strongest[ys[i] : ys[i + 1], xs[j] : xs[j + 1]]
            blk_keep = keep[ys[i] : ys[i + 1], xs[j] : xs[j + 1]]
            hist = np.bincount(blk_bins[blk_keep].ravel(), minlength=EOH_DIM).astype(
                np.float64
            )
            parts.append(_normalize_hist(hist, EOH_DIM) / 16.0)
    return np.concatenate(parts)


def compute_all(pixels, lbp_params=LbpParams(), eoh_tau=EOH_TAU):
    """Extract all four descriptors of one image."""
    return DescriptorSet(
        cdh=compute_cdh(pixels),
        lbp=compute_lbp(pixels, lbp_params),
        cld=compute_cld(pixels),
        eoh=compute_eoh(pixels, tau=eoh_tau),
    )


def descriptor_config():
    """The extraction constants recorded in a database header."""
    return {
        "cdh": {
            "l_bins": CDH_L_BINS,
            "a_bins": CDH_A_BINS,
            "b_bins": CDH_B_BINS,
            "ori_bins": CDH_ORI_BINS,
            "ab_range": CDH_AB_RANGE,
        },
        "lbp": {"points": 8, "radius": 1.0},
        "cld": {
            "grid": CLD_GRID,
            "coeffs": [CLD_N_Y, CLD_N_CB, CLD_N_CR],
            "weights_y": list(CLD_WEIGHTS_Y),
            "weights_cb": list(CLD_WEIGHTS_CB),
            "weights_cr": list(CLD_WEIGHTS_CR),
        },
        "eoh": {"tau": EOH_TAU, "block_based": False},
        "dims": list(DESCRIPTOR_DIMS),
    }
