"""Write the bundled 64x64 test crops (binary PGM) from scikit-image's sample data.

Each image is converted to grayscale, downscaled to 256x256 by 2x2 block
averaging (from 512x512), and a 64x64 crop with visible structure is kept.
"""

import argparse
import pathlib

import numpy as np
from skimage import color, data

CROPS = {
    # name: (loader, top, left)
    "cameraman64": (data.camera, 40, 96),
    "astronaut64": (lambda: color.rgb2gray(data.astronaut()) * 255.0, 30, 100),
}


def block_mean(img, factor):
    h, w = img.shape
    return img[: h - h % factor, : w - w % factor].reshape(h // factor, factor, w // factor, factor).mean(axis=(1, 3))


def write_pgm(path, img):
    pixels = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode()
    path.write_bytes(header + pixels.tobytes())


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=pathlib.Path(__file__).resolve().parent.parent / "data", type=pathlib.Path)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, (load, top, left) in CROPS.items():
        small = block_mean(np.asarray(load(), dtype=np.float64), 2)
        write_pgm(args.out / f"{name}.pgm", small[top : top + 64, left : left + 64])


if __name__ == "__main__":
    main()
