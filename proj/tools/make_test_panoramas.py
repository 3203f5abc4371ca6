#!/usr/bin/env python3
"""Builds the equirectangular test fixtures in tests/data from stock photos.

Each photo is resized to a square, mirrored horizontally and tiled so the
result wraps continuously across the 0/2pi seam, then saved as a 2:1 JPEG.
"""
import os
import sys

import matplotlib
import skimage
from PIL import Image

WIDTH, HEIGHT = 2048, 1024


def sources():
    sk = os.path.join(os.path.dirname(skimage.__file__), "data")
    mpl = os.path.join(matplotlib.get_data_path(), "sample_data")
    return [
        os.path.join(sk, "astronaut.png"),
        os.path.join(sk, "coffee.png"),
        os.path.join(sk, "chelsea.png"),
        os.path.join(sk, "rocket.jpg"),
        os.path.join(sk, "motorcycle_left.png"),
        os.path.join(mpl, "grace_hopper.jpg"),
    ]


def main(out_dir):
    os.makedirs(out_dir, exist_ok=True)
    for i, path in enumerate(sources()):
        img = Image.open(path).convert("RGB").resize((WIDTH // 2, HEIGHT), Image.LANCZOS)
        pano = Image.new("RGB", (WIDTH, HEIGHT))
        pano.paste(img, (0, 0))
        pano.paste(img.transpose(Image.FLIP_LEFT_RIGHT), (WIDTH // 2, 0))
        pano.save(os.path.join(out_dir, f"pano_{i}.jpg"), quality=85)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "tests", "data"))
