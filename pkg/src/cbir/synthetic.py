"""Synthetic image corpus with descriptor-specific class structure.

Four archetypes cycle across the requested number of classes:

* hue: a flat colored field whose hue identifies the class, with
  low-amplitude pixel noise that stays below the edge threshold.
* texture: fine stripes (period a few pixels) over two mid grays.
* layout: a single spatial split between the same two mid grays, so
  global color statistics match the texture classes.
* edge: coarse diagonal stripes over the same grays, so orientation
  statistics rather than color separate them.

Class 17 onward reuses the archetypes with new parameter variants.
Everything is driven by one seeded generator, so a given (classes,
per_class, seed) triple always produces identical pixels.
"""

import os

import cv2
import numpy as np

ARCHETYPES = ("hue", "texture", "layout", "edge")

_HUE_CENTERS = (0.0, 210.0, 280.0, 40.0)
_TEXTURE_PARAMS = (("h", 3, 5), ("v", 3, 5), ("h", 6, 8), ("v", 6, 8))
_LAYOUT_PARAMS = ("tb", "bt", "lr", "rl")
_EDGE_PARAMS = ((1, 20, 28), (-1, 20, 28), (1, 32, 40), (-1, 32, 40))

_GRAY_DARK = 105
_GRAY_LIGHT = 165
_NOISE = 8


def _hsv_to_rgb(h, s, v):
    """Scalar HSV (h in degrees) to RGB floats in [0, 1]."""
    h = (h % 360.0) / 60.0
    i = int(h) % 6
    f = h - int(h)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    return [
        (v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q),
    ][i]


def _with_noise(field, rng):
    noisy = field.astype(np.int64) + rng.integers(-_NOISE, _NOISE + 1, field.shape)
    return np.clip(noisy, 0, 255).astype(np.uint8)


def _gray_pair(rng):
    dark = _GRAY_DARK + int(rng.integers(-6, 7))
    light = _GRAY_LIGHT + int(rng.integers(-6, 7))
    return dark, light


def _stripe_values(coord, period, phase, dark, light):
    on = ((coord + phase) % period) < (period + 1) // 2
    return np.where(on, dark, light)


def _hue_image(variant, rng, size):
    center = _HUE_CENTERS[variant % len(_HUE_CENTERS)]
    h = center + rng.uniform(-10.0, 10.0)
    s = 0.55 + rng.uniform(0.0, 0.15)
    v = 0.60 + rng.uniform(0.0, 0.15)
    rgb = np.array(_hsv_to_rgb(h, s, v)) * 255.0
    field = np.tile(rgb.astype(np.int64), (size, size, 1))
    return _with_noise(field, rng)


def _texture_image(variant, rng, size):
    orient, lo, hi = _TEXTURE_PARAMS[variant % len(_TEXTURE_PARAMS)]
    period = int(rng.integers(lo, hi + 1))
    phase = int(rng.integers(0, period))
    dark, light = _gray_pair(rng)
    coord = np.arange(size)
    line = _stripe_values(coord, period, phase, dark, light)
    if orient == "h":
        field = np.repeat(line[:, None], size, axis=1)
    else:
        field = np.repeat(line[None, :], size, axis=0)
    return _with_noise(np.stack([field] * 3, axis=-1), rng)


def _layout_image(variant, rng, size):
    arrangement = _LAYOUT_PARAMS[variant % len(_LAYOUT_PARAMS)]
    split = size // 2 + int(rng.integers(-12, 13))
    dark, light = _gray_pair(rng)
    field = np.empty((size, size), dtype=np.int64)
    first, second = (dark, light) if arrangement in ("tb", "lr") else (light, dark)
    if arrangement in ("tb", "bt"):
        field[:split, :] = first
        field[split:, :] = second
    else:
        field[:, :split] = first
        field[:, split:] = second
    return _with_noise(np.stack([field] * 3, axis=-1), rng)


def _edge_image(variant, rng, size):
    sign, lo, hi = _EDGE_PARAMS[variant % len(_EDGE_PARAMS)]
    period = int(rng.integers(lo, hi + 1))
    phase = int(rng.integers(0, period))
    dark, light = _gray_pair(rng)
    y, x = np.mgrid[0:size, 0:size]
    coord = x + y if sign > 0 else x - y + size
    field = _stripe_values(coord, period, phase, dark, light)
    return _with_noise(np.stack([field] * 3, axis=-1), rng)


_BUILDERS = {
    "hue": _hue_image,
    "texture": _texture_image,
    "layout": _layout_image,
    "edge": _edge_image,
}


def make_image(archetype, variant, rng, size=256):
    """One synthetic image of the given archetype and parameter variant."""
    return _BUILDERS[archetype](variant, rng, size)


def class_names(classes):
    """Archetype-cycled class directory names, e.g. hue00, texture00, ..."""
    return [
        f"{ARCHETYPES[i % len(ARCHETYPES)]}{i // len(ARCHETYPES):02d}"
        for i in range(classes)
    ]


def generate_corpus(root, classes=4, per_class=20, seed=7, size=256):
    """Write a class-per-directory PNG corpus under root; returns root."""
    if classes < 1 or per_class < 1:
        raise ValueError("need at least one class and one image per class")
    rng = np.random.default_rng(seed)
    for i, name in enumerate(class_names(classes)):
        cls_dir = os.path.join(root, name)
        os.makedirs(cls_dir, exist_ok=True)
        archetype = ARCHETYPES[i % len(ARCHETYPES)]
        variant = i // len(ARCHETYPES)
        for j in range(per_class):
            pixels = make_image(archetype, variant, rng, size)
            out = os.path.join(cls_dir, f"img_{j:03d}.png")
            if not cv2.imwrite(out, cv2.cvtColor(pixels, cv2.COLOR_RGB2BGR)):
                raise OSError(f"failed to write {out}")
    return root
