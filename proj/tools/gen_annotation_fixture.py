#!/usr/bin/env python3
"""Writes data/annotations/{coco,mvd,oid}.json and manifest.json.

Category names are the dataset-specific names of the demo label space.
"""
import json
import random
from pathlib import Path

DOMAINS = {
    "COCO": ["banana", "person", "car", "bear", "teddy bear", "truck", "kite"],
    "MVD": ["human--person", "object--vehicle--car", "object--vehicle--trailer",
            "object--vehicle--caravan", "object--vehicle--truck", "object--pothole"],
    "OID": ["banana", "apple", "man", "woman", "boy", "girl", "taxi", "truck",
            "brown bear", "teddy bear", "fruit", "person_super", "bear_super"],
}
IMAGES_PER_DOMAIN = 10


def main():
    out = Path(__file__).resolve().parent.parent / "data" / "annotations"
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240601)
    manifest = {"domains": {}}
    for tag, names in DOMAINS.items():
        images = []
        boxes_total = 0
        for i in range(IMAGES_PER_DOMAIN):
            width, height = rng.choice([(640, 480), (800, 600), (1024, 768)])
            boxes = []
            for _ in range(rng.randint(1, 4)):
                w = rng.randint(8, width // 3)
                h = rng.randint(8, height // 3)
                x = rng.randint(0, width - w)
                y = rng.randint(0, height - h)
                boxes.append({"bbox": [x, y, w, h], "category_name": rng.choice(names)})
            boxes_total += len(boxes)
            images.append({"image_id": f"{tag.lower()}-{i:03d}", "width": width,
                           "height": height, "boxes": boxes})
        path = out / f"{tag.lower()}.json"
        path.write_text(json.dumps({"dataset_tag": tag, "images": images}, indent=1) + "\n")
        manifest["domains"][tag] = {"file": path.name, "images": len(images), "boxes": boxes_total}
    manifest["images"] = sum(d["images"] for d in manifest["domains"].values())
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


if __name__ == "__main__":
    main()
