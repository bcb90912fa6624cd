#!/usr/bin/env python3
"""Generate the bundled 540-category label-space fixture under data/rvc540/.

The fixture reproduces the cardinality structure of the RVC 2022 object
detection taxonomy: 500 OID challenge classes (leaves plus superclasses),
80 COCO classes and 37 MVD classes, of which 40 COCO/MVD classes are not
merged with any OID leaf. MIDs cited in the duplication/hierarchy link
tables are the real Open Images identifiers; every other MID is a
synthetic placeholder with the "/m/zz" prefix.

Usage: gen_rvc540_fixture.py [OUT_DIR]
"""

import json
import os
import sys

ROOT_MID = "/m/0bl9f"

COCO_CLASSES = [
    "person", "bicycle", "car", "motorcycle", "airplane", "bus", "train",
    "truck", "boat", "traffic light", "fire hydrant", "stop sign",
    "parking meter", "bench", "bird", "cat", "dog", "horse", "sheep", "cow",
    "elephant", "bear", "zebra", "giraffe", "backpack", "umbrella",
    "handbag", "tie", "suitcase", "frisbee", "skis", "snowboard",
    "sports ball", "kite", "baseball bat", "baseball glove", "skateboard",
    "surfboard", "tennis racket", "bottle", "wine glass", "cup", "fork",
    "knife", "spoon", "bowl", "banana", "apple", "sandwich", "orange",
    "broccoli", "carrot", "hot dog", "pizza", "donut", "cake", "chair",
    "couch", "potted plant", "bed", "dining table", "toilet", "tv", "laptop",
    "mouse", "remote", "keyboard", "cell phone", "microwave", "oven",
    "toaster", "sink", "refrigerator", "book", "clock", "vase", "scissors",
    "teddy bear", "hair drier", "toothbrush",
]

MVD_CLASSES = [
    "animal--bird", "animal--ground-animal", "human--person",
    "human--rider--bicyclist", "human--rider--motorcyclist",
    "human--rider--other-rider", "object--banner", "object--bench",
    "object--bike-rack", "object--billboard", "object--catch-basin",
    "object--cctv-camera", "object--fire-hydrant", "object--junction-box",
    "object--mailbox", "object--manhole", "object--phone-booth",
    "object--pothole", "object--street-light", "object--support--pole",
    "object--support--traffic-sign-frame", "object--support--utility-pole",
    "object--traffic-light", "object--traffic-sign--back",
    "object--traffic-sign--front", "object--trash-can",
    "object--vehicle--bicycle", "object--vehicle--boat",
    "object--vehicle--bus", "object--vehicle--car",
    "object--vehicle--caravan", "object--vehicle--motorcycle",
    "object--vehicle--on-rails", "object--vehicle--other-vehicle",
    "object--vehicle--trailer", "object--vehicle--truck",
    "object--vehicle--wheeled-slow",
]

# COCO classes that are not merged with any OID leaf.
COCO_UNMERGED = [
    "sports ball", "bear", "bed", "bird", "boat", "car", "clock", "person",
    "cow", "hair drier", "parking meter", "remote", "potted plant",
    "frisbee", "skis", "hot dog",
]

# MVD classes merged into an unmerged COCO row (unified name -> MVD name).
MVD_INTO_COCO_ROW = {
    "bird": "animal--bird",
    "boat": "object--vehicle--boat",
    "car": "object--vehicle--car",
    "person": "human--person",
}

# MVD classes merged into an OID leaf row (unified name -> MVD name).
MVD_INTO_OID_LEAF = {
    "bench": "object--bench",
    "fire hydrant": "object--fire-hydrant",
    "traffic light": "object--traffic-light",
    "street light": "object--street-light",
    "bicycle": "object--vehicle--bicycle",
    "bus": "object--vehicle--bus",
    "motorcycle": "object--vehicle--motorcycle",
    "truck": "object--vehicle--truck",
    "train": "object--vehicle--on-rails",
}

EQUIVALENCES = [
    ("COCO", "sports ball", "/m/018xm"),
    ("COCO", "bear", "/m/01dws"),
    ("COCO", "bed", "/m/03ssj5"),
    ("COCO", "bird", "/m/015p6"),
    ("COCO", "boat", "/m/019jd"),
    ("COCO", "car", "/m/0k4j"),
    ("COCO", "clock", "/m/01x3z"),
    ("COCO", "person", "/m/01g317"),
    ("MVD", "object--vehicle--car", "/m/0k4j"),
    ("MVD", "human--person", "/m/01g317"),
]

CROSS_PARENTS = [
    ("COCO", "cow", "/m/0jbk"),
    ("MVD", "animal--ground-animal", "/m/0jbk"),
    ("MVD", "object--vehicle--caravan", "/m/01prls"),
    ("MVD", "object--vehicle--other-vehicle", "/m/01prls"),
    ("MVD", "object--vehicle--trailer", "/m/01prls"),
    ("MVD", "object--vehicle--wheeled-slow", "/m/01prls"),
    ("MVD", "object--support--traffic-sign-frame", "/m/01mqdt"),
    ("MVD", "object--traffic-sign--back", "/m/01mqdt"),
    ("MVD", "object--traffic-sign--front", "/m/01mqdt"),
]

# Named part of the OID tree: (name, mid, children). Leaves have children
# None. Superclasses that collide with an unmerged COCO name get "_super".
NAMED_TREE = [
    ("animal", "/m/0jbk", [
        ("mammal", "/m/zz0001", [
            ("bear_super", "/m/01dws", [
                ("brown bear", "/m/zz0101", None),
                ("polar bear", "/m/zz0102", None),
                ("teddy bear", "/m/0kmg4", None),
            ]),
            ("carnivore", "/m/zz0002", [
                ("dog", None, None), ("cat", None, None),
                ("fox", "/m/zz0103", None),
            ]),
            ("cattle", "/m/zz0104", None),
            ("horse", None, None), ("sheep", None, None),
            ("elephant", None, None), ("zebra", None, None),
            ("giraffe", None, None),
        ]),
        ("bird_super", "/m/015p6", [
            ("duck", "/m/zz0105", None), ("eagle", "/m/zz0106", None),
            ("owl", "/m/zz0107", None), ("parrot", "/m/zz0108", None),
            ("sparrow", "/m/zz0109", None), ("penguin", "/m/zz0110", None),
        ]),
    ]),
    ("person_super", "/m/01g317", [
        ("man", "/m/zz0111", None), ("woman", "/m/zz0112", None),
        ("boy", "/m/zz0113", None), ("girl", "/m/zz0114", None),
    ]),
    ("vehicle", "/m/zz0003", [
        ("land vehicle", "/m/01prls", [
            ("car_super", "/m/0k4j", [
                ("limousine", "/m/zz0115", None),
                ("taxi", "/m/zz0116", None),
                ("van", "/m/zz0117", None),
            ]),
            ("bicycle", None, None), ("motorcycle", None, None),
            ("bus", None, None), ("truck", None, None),
            ("train", None, None),
        ]),
        ("watercraft", "/m/zz0004", [
            ("boat_super", "/m/019jd", [
                ("canoe", "/m/zz0118", None), ("gondola", "/m/zz0119", None),
                ("barge", "/m/zz0120", None), ("jet ski", "/m/zz0121", None),
            ]),
        ]),
        ("aircraft", "/m/zz0005", [
            ("airplane", None, None), ("helicopter", "/m/zz0122", None),
        ]),
    ]),
    ("ball", "/m/018xm", [
        ("football", "/m/zz0123", None), ("tennis ball", "/m/zz0124", None),
        ("volleyball", "/m/zz0125", None), ("rugby ball", "/m/zz0126", None),
        ("cricket ball", "/m/zz0127", None), ("golf ball", "/m/zz0128", None),
    ]),
    ("food", "/m/zz0006", [
        ("fruit", "/m/zz0007", [
            ("banana", "/m/09qck", None), ("apple", None, None),
            ("orange", None, None),
        ]),
        ("vegetable", "/m/zz0008", [
            ("broccoli", None, None), ("carrot", None, None),
        ]),
        ("sandwich", None, None), ("pizza", None, None),
        ("donut", None, None), ("cake", None, None),
    ]),
    ("furniture", "/m/zz0009", [
        ("bed_super", "/m/03ssj5", [
            ("infant bed", "/m/zz0129", None),
            ("sofa bed", "/m/zz0130", None),
        ]),
        ("chair", None, None), ("couch", None, None), ("bench", None, None),
        ("dining table", None, None),
    ]),
    ("clock_super", "/m/01x3z", [
        ("alarm clock", "/m/zz0131", None),
        ("wall clock", "/m/zz0132", None),
        ("digital clock", "/m/zz0133", None),
    ]),
    ("traffic sign", "/m/01mqdt", [
        ("stop sign", None, None),
    ]),
    ("toy", "/m/zz0010", [
        ("teddy bear", "/m/0kmg4", None), ("kite", None, None),
    ]),
    ("street light", "/m/zz0134", None),
    ("traffic light", None, None),
    ("fire hydrant", None, None),
]

OID_CLASS_COUNT = 500
NONLEAF_COUNT = 60
FILLER_GROUP_SIZE = 9


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "data", "rvc540")
    os.makedirs(out_dir, exist_ok=True)

    mids = {}
    counter = [200]

    def mid_for(name, given):
        if name in mids:
            return mids[name]
        if given is None:
            given = "/m/zz%04d" % counter[0]
            counter[0] += 1
        mids[name] = given
        return given

    leaves, nonleaves = {}, {}

    def to_json(node):
        name, mid, children = node
        mid = mid_for(name, mid)
        if children is None:
            leaves[name] = mid
            return {"LabelName": mid}
        nonleaves[name] = mid
        return {"LabelName": mid, "Subcategory": [to_json(c) for c in children]}

    top = [to_json(n) for n in NAMED_TREE]

    # Remaining COCO classes merged with OID leaves hang under filler groups.
    coco_merged = [c for c in COCO_CLASSES if c not in COCO_UNMERGED]
    pending = [c for c in coco_merged if c not in leaves]

    filler_groups = NONLEAF_COUNT - len(nonleaves)
    leaf_budget = OID_CLASS_COUNT - NONLEAF_COUNT - len(leaves)
    assert filler_groups > 0 and leaf_budget >= len(pending)
    filler_leaves = pending + ["oid leaf %03d" % i
                               for i in range(leaf_budget - len(pending))]
    for g in range(filler_groups):
        name = "oid group %02d" % g
        chunk = filler_leaves[g::filler_groups]
        assert chunk, "filler group without leaves"
        top.append(to_json((name, None, [(leaf, None, None) for leaf in chunk])))

    assert len(nonleaves) == NONLEAF_COUNT, len(nonleaves)
    assert len(leaves) + len(nonleaves) == OID_CLASS_COUNT

    hierarchy = {"LabelName": ROOT_MID, "Subcategory": top}

    rows = []
    for name in sorted(leaves):
        coco = name if name in coco_merged else ""
        mvd = MVD_INTO_OID_LEAF.get(name, "")
        rows.append((name, coco, mvd, leaves[name]))
    for name in sorted(nonleaves):
        rows.append((name, "", "", nonleaves[name]))
    for name in COCO_UNMERGED:
        rows.append((name, name, MVD_INTO_COCO_ROW.get(name, ""), ""))
    used_mvd = set(MVD_INTO_COCO_ROW.values()) | set(MVD_INTO_OID_LEAF.values())
    for name in MVD_CLASSES:
        if name not in used_mvd:
            rows.append((name, "", name, ""))

    assert len({r[0] for r in rows}) == len(rows)
    assert sorted(r[1] for r in rows if r[1]) == sorted(COCO_CLASSES)
    assert sorted(r[2] for r in rows if r[2]) == sorted(MVD_CLASSES)
    unmerged = [r for r in rows if not r[3]]
    assert len(unmerged) == 40, len(unmerged)
    # Mapping rows name every OID class, so the space has 500 + 40 nodes.
    assert len(rows) == 540

    with open(os.path.join(out_dir, "hierarchy.json"), "w") as f:
        json.dump(hierarchy, f, indent=1)
        f.write("\n")
    with open(os.path.join(out_dir, "mapping.csv"), "w") as f:
        f.write("unified_name,coco_name,mvd_name,oid_mid\n")
        for r in rows:
            f.write(",".join(r) + "\n")
    for fname, table in (("equiv.csv", EQUIVALENCES), ("cross.csv", CROSS_PARENTS)):
        with open(os.path.join(out_dir, fname), "w") as f:
            f.write("source_dataset,source_name,oid_mid\n")
            for r in table:
                f.write(",".join(r) + "\n")


if __name__ == "__main__":
    main()
