"""Four descriptors on four kinds of image content.

Each descriptor targets one aspect of an image: CDH couples color
difference with edge orientation, LBP captures micro texture, CLD
summarizes the spatial color layout, and EOH counts edge directions.
This script builds one synthetic image per archetype plus two
hand-made fixtures and prints how each descriptor responds.
"""

import numpy as np

from cbir.descriptors import (
    compute_all,
    compute_cdh,
    compute_cld,
    compute_eoh,
    compute_lbp,
)
from cbir.synthetic import ARCHETYPES, make_image


def describe(name, vec, top=3):
    order = np.argsort(vec)[::-1][:top]
    bins = ", ".join(f"bin {i}: {vec[i]:.3f}" for i in order)
    print(f"  {name:4s} dim={vec.size:<4d} sum={vec.sum():8.3f}  top: {bins}")


def main():
    rng = np.random.default_rng(7)

    print("One image per synthetic archetype")
    for archetype in ARCHETYPES:
        image = make_image(archetype, 0, rng)
        ds = compute_all(image)
        print(f"{archetype} image:")
        describe("cdh", ds.cdh)
        describe("lbp", ds.lbp)
        describe("cld", ds.cld)
        describe("eoh", ds.eoh)

    print()
    print("Fixture 1: a constant gray image has no structure at all")
    flat = np.full((64, 64, 3), 128, dtype=np.uint8)
    lbp = compute_lbp(flat)
    eoh = compute_eoh(flat)
    cld = compute_cld(flat)
    print(f"  lbp mass sits in the all-ones code: lbp[255] = {lbp[255]:.1f}")
    print(f"  eoh falls back to uniform: {np.round(eoh, 3)}")
    print(f"  cld AC coefficients vanish: max |ac| = {np.abs(np.delete(cld, [0, 6, 9])).max():.2e}")

    print()
    print("Fixture 2: a vertical step edge drives the vertical edge bin")
    step = np.full((64, 64), 40, dtype=np.uint8)
    step[:, 32:] = 200
    eoh = compute_eoh(np.stack([step] * 3, axis=-1))
    print(f"  eoh = {np.round(eoh, 3)} (vertical bin first)")

    print()
    print("Fixture 3: a diagonal ramp concentrates CDH orientation mass")
    xs = np.arange(64, dtype=np.float64)
    ramp = np.clip(np.add.outer(xs, xs) * 2.0, 0, 255).astype(np.uint8)
    cdh = compute_cdh(np.stack([ramp] * 3, axis=-1))
    orientation = cdh[90:]
    print(f"  45 degree bin share of orientation mass: "
          f"{orientation[2] / max(orientation.sum(), 1e-12):.2f}")


if __name__ == "__main__":
    main()
