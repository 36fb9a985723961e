"""Regenerate the gray-scale test corpus under crates/core/tests/data.

Sources are the public-domain / CC0 sample images bundled with scikit-image.
Covers are 512x512 images upscaled 2x (bicubic) to 1024x1024; secrets are
512x512 gray-scale images.
"""
import os
import skimage
from PIL import Image

SRC = os.path.join(os.path.dirname(skimage.__file__), "data")
OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "tests", "data")


def load(name):
    return Image.open(os.path.join(SRC, name)).convert("L")


def save(img, sub, name):
    path = os.path.join(OUT, sub, name)
    img.save(path, format="PPM")  # mode L is written as binary P5
    print(path, img.size)


covers = {"camera": load("camera.png"), "astronaut": load("astronaut.png")}
for name, img in covers.items():
    save(img.resize((1024, 1024), Image.BICUBIC), "covers", name + ".pgm")

coffee = load("coffee.png")
w, h = coffee.size
side = min(w, h)
coffee = coffee.crop(((w - side) // 2, (h - side) // 2, (w + side) // 2, (h + side) // 2))
secrets = {
    "1_camera": load("camera.png"),
    "2_astronaut": load("astronaut.png"),
    "3_moon": load("moon.png"),
    "4_coffee": coffee.resize((512, 512), Image.BICUBIC),
}
for name, img in secrets.items():
    save(img, "secrets", name + ".pgm")
