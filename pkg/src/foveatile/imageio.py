"""Binary PPM (P6, 8-bit) input and output."""

from pathlib import Path

import numpy as np
from PIL import Image

Image.MAX_IMAGE_PIXELS = None


def read_ppm(path) -> np.ndarray:
    path = Path(path)
    with path.open("rb") as fh:
        if fh.read(2) != b"P6":
            raise ValueError(f"{path}: not a binary P6 pixmap")
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def write_ppm(path, img: np.ndarray) -> None:
    img = np.asarray(img, dtype=np.uint8)
    Image.fromarray(img, "RGB").save(Path(path), format="PPM")
