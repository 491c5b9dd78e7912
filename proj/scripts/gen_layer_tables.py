#!/usr/bin/env python3
# Copyright 2026 The trivid Authors
# Licensed under the terms of the Apache 2.0 License.
"""Regenerates the layer tables under data/.

The tables describe a ResNet-50 style backbone, a light FPN+RPN neck and a
fixed-cost tracking head at two input resolutions. Costs of non-conv blocks
(pools, the head) are carried as fixed entries so stage sums stay honest.
"""

import json
import pathlib

OUT_DIR = pathlib.Path(__file__).resolve().parent.parent / "data"

# (mid channels, out channels, blocks, first-block stride)
STAGES = [(64, 256, 3, 1), (128, 512, 4, 2), (256, 1024, 6, 2),
          (512, 2048, 3, 2)]


def out_dim(size, k, stride, padding):
    return (size + 2 * padding - k) // stride + 1


def conv(name, c_in, c_out, k, stride, padding, h, w):
    return {
        "name": name,
        "kind": "conv",
        "c_in": c_in,
        "c_out": c_out,
        "k": k,
        "stride": stride,
        "padding": padding,
        "h": h,
        "w": w,
    }


def conv_gops(layer):
    h_out = out_dim(layer["h"], layer["k"], layer["stride"], layer["padding"])
    w_out = out_dim(layer["w"], layer["k"], layer["stride"], layer["padding"])
    return (2.0 * h_out * w_out * layer["c_out"] * layer["c_in"] *
            layer["k"] ** 2 / 1e9)


def pool(name, c, h, w, k=3, stride=2, padding=1):
    h_out = out_dim(h, k, stride, padding)
    w_out = out_dim(w, k, stride, padding)
    out_cells = h_out * w_out
    in_cells = h * w
    return {
        "name": name,
        "kind": "fixed",
        "gops": 0.0,
        "cycles": out_cells * c // 64,
        "dram_bytes": (in_cells + out_cells) * c * 4,
    }, h_out, w_out


def resnet50(h, w):
    layers = [conv("conv1", 3, 64, 7, 2, 3, h, w)]
    h = out_dim(h, 7, 2, 3)
    w = out_dim(w, 7, 2, 3)
    p, h, w = pool("pool1", 64, h, w)
    layers.append(p)
    c_in = 64
    for s, (mid, c_out, blocks, first_stride) in enumerate(STAGES, start=2):
        for b in range(blocks):
            stride = first_stride if b == 0 else 1
            tag = f"conv{s}_{b}"
            layers.append(conv(f"{tag}_a", c_in, mid, 1, 1, 0, h, w))
            layers.append(conv(f"{tag}_b", mid, mid, 3, stride, 1, h, w))
            h2 = out_dim(h, 3, stride, 1)
            w2 = out_dim(w, 3, stride, 1)
            layers.append(conv(f"{tag}_c", mid, c_out, 1, 1, 0, h2, w2))
            if b == 0:
                layers.append(
                    conv(f"{tag}_proj", c_in, c_out, 1, stride, 0, h, w))
            h, w = h2, w2
            c_in = c_out
    return layers


def fpn_rpn(h, w):
    # Feature dims after the backbone at input h x w.
    dims = {}
    hh = out_dim(out_dim(h, 7, 2, 3), 3, 2, 1)
    ww = out_dim(out_dim(w, 7, 2, 3), 3, 2, 1)
    channels = {2: 256, 3: 512, 4: 1024, 5: 2048}
    for level in range(2, 6):
        if level > 2:
            hh = out_dim(hh, 3, 2, 1)
            ww = out_dim(ww, 3, 2, 1)
        dims[level] = (hh, ww)
    layers = []
    for level in range(3, 6):
        lh, lw = dims[level]
        layers.append(
            conv(f"lateral_c{level}", channels[level], 256, 1, 1, 0, lh, lw))
    for level in (4, 5):
        lh, lw = dims[level]
        layers.append(conv(f"fpn_p{level}", 256, 256, 3, 1, 1, lh, lw))
    rh, rw = dims[5]
    layers.append(conv("rpn_conv", 256, 256, 3, 1, 1, rh, rw))
    layers.append(conv("rpn_cls", 256, 3, 1, 1, 0, rh, rw))
    layers.append(conv("rpn_reg", 256, 12, 1, 1, 0, rh, rw))
    return layers


def track_head(h, w):
    hh, ww = h, w
    for _ in range(5):  # stride 32
        hh = out_dim(hh, 3, 2, 1)
        ww = out_dim(ww, 3, 2, 1)
    embed = conv("embed_conv", 256, 256, 1, 1, 0, hh, ww)
    # RoI similarity head: cost lumped from per-proposal fully connected
    # work (256 proposals x 7x7x256 features -> 1024 -> 256).
    proposals = 256
    macs = proposals * (7 * 7 * 256 * 1024 + 1024 * 256)
    head = {
        "name": "similarity_head",
        "kind": "fixed",
        "gops": round(2.0 * macs / 1e9, 4),
        "cycles": macs // 1024,
        "dram_bytes": proposals * 7 * 7 * 256 * 4,
    }
    return [embed, head]


def write(name, layers):
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    path = OUT_DIR / name
    with open(path, "w") as f:
        json.dump({"layers": layers}, f, indent=2)
        f.write("\n")
    total = sum(
        l["gops"] if l["kind"] == "fixed" else conv_gops(l) for l in layers)
    print(f"{path}: {len(layers)} layers, {total:.2f} GOPs")


def main():
    write("resnet50_224.json", resnet50(224, 224))
    write("resnet50_hd.json", resnet50(720, 1280))
    write("fpn_rpn_hd.json", fpn_rpn(720, 1280))
    write("track_head.json", track_head(720, 1280))


if __name__ == "__main__":
    main()
