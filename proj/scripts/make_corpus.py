"""Render the bundled sample corpus: flat-colored shape compositions with dark outlines
(color/) and the matching outline-only drawings (sketch/).

    python scripts/make_corpus.py data/sample --count 8 --seed 0
"""

import argparse
import pathlib
import random

from PIL import Image, ImageDraw

SIZE = 256
OUTLINE = 3


def random_color(rng, lo=40, hi=235):
    return tuple(rng.randint(lo, hi) for _ in range(3))


def random_shape(rng):
    kind = rng.choice(["ellipse", "rectangle", "triangle"])
    cx, cy = rng.randint(40, SIZE - 40), rng.randint(40, SIZE - 40)
    w, h = rng.randint(40, 110), rng.randint(40, 110)
    box = [cx - w // 2, cy - h // 2, cx + w // 2, cy + h // 2]
    if kind == "triangle":
        pts = [(rng.randint(box[0], box[2]), box[1]), (box[0], box[3]), (box[2], box[3])]
        return kind, pts
    return kind, box


def draw(draw_ctx, shape, fill):
    kind, geom = shape
    if kind == "ellipse":
        draw_ctx.ellipse(geom, fill=fill, outline=(0, 0, 0), width=OUTLINE)
    elif kind == "rectangle":
        draw_ctx.rectangle(geom, fill=fill, outline=(0, 0, 0), width=OUTLINE)
    else:
        draw_ctx.polygon(geom, fill=fill, outline=(0, 0, 0))
        draw_ctx.line(geom + [geom[0]], fill=(0, 0, 0), width=OUTLINE)


def render(rng):
    background = random_color(rng, 170, 250)
    color = Image.new("RGB", (SIZE, SIZE), background)
    sketch = Image.new("RGB", (SIZE, SIZE), (255, 255, 255))
    dc, ds = ImageDraw.Draw(color), ImageDraw.Draw(sketch)
    for _ in range(rng.randint(3, 5)):
        shape = random_shape(rng)
        draw(dc, shape, random_color(rng))
        draw(ds, shape, (255, 255, 255))
    return color, sketch.convert("L")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("root", type=pathlib.Path)
    parser.add_argument("--count", type=int, default=8)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--prefix", default="sample")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    (args.root / "color").mkdir(parents=True, exist_ok=True)
    (args.root / "sketch").mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        color, sketch = render(rng)
        name = f"{args.prefix}_{i:03d}.png"
        color.save(args.root / "color" / name)
        sketch.save(args.root / "sketch" / name)


if __name__ == "__main__":
    main()
