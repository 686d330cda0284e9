#!/usr/bin/env python3
"""Writes the benchmark graph descriptors into workloads/.

Geometries follow the standard published networks. Activation precisions and
sequence lengths are modeling assumptions fitted to reference throughputs;
see README.
"""
import json
import pathlib
import sys

SCHEMA = 1


class Graph:
    def __init__(self, name, channels, height, width, bits, act_bits):
        self.doc = {
            "schema_version": SCHEMA,
            "name": name,
            "input": {"channels": channels, "height": height, "width": width, "bits": bits},
            "defaults": {"act_bits": act_bits, "system": {"kind": "unweighted"}},
            "layers": [],
        }
        self.count = 0
        self.act_bits = act_bits

    def add(self, kind, inputs=None, name=None, **kw):
        self.count += 1
        name = name or f"{kind}{self.count}"
        layer = {"type": kind, "name": name}
        if inputs is not None:
            layer["inputs"] = inputs if isinstance(inputs, list) else [inputs]
        layer.update(kw)
        self.doc["layers"].append(layer)
        return name

    def conv(self, src, out, k, stride=1, pad=0, name=None, relu=True):
        x = self.add("conv", src, name, out_channels=out, kernel=k, stride=stride, pad=pad)
        if relu:
            x = self.add("relu", x)
            x = self.add("quantize", x, bits=self.act_bits)
        return x

    def write(self, path):
        path.write_text(json.dumps(self.doc, indent=1) + "\n")


def alexnet():
    g = Graph("alexnet", 3, 227, 227, 8, 4)
    x = g.conv("input", 96, 11, stride=4)
    x = g.add("pool", x, kernel=3, stride=2)
    x = g.conv(x, 256, 5, pad=2)
    x = g.add("pool", x, kernel=3, stride=2)
    x = g.conv(x, 384, 3, pad=1)
    x = g.conv(x, 384, 3, pad=1)
    x = g.conv(x, 256, 3, pad=1)
    x = g.add("pool", x, kernel=3, stride=2)
    for width in (4096, 4096):
        x = g.add("fc", x, out_features=width)
        x = g.add("relu", x)
        x = g.add("quantize", x, bits=g.act_bits)
    g.add("fc", x, out_features=1000)
    return g


def resnet34():
    g = Graph("resnet34", 3, 224, 224, 8, 4)
    x = g.conv("input", 64, 7, stride=2, pad=3)
    x = g.add("pool", x, kernel=3, stride=2, pad=1)
    channels = 64
    for stage, (width, blocks) in enumerate(((64, 3), (128, 4), (256, 6), (512, 3))):
        for b in range(blocks):
            stride = 2 if stage > 0 and b == 0 else 1
            y = g.conv(x, width, 3, stride=stride, pad=1)
            y = g.conv(y, width, 3, pad=1, relu=False)
            skip = x
            if stride != 1 or channels != width:
                skip = g.conv(x, width, 1, stride=stride, relu=False)
            x = g.add("add", [y, skip])
            x = g.add("relu", x)
            x = g.add("quantize", x, bits=g.act_bits)
            channels = width
    x = g.add("pool", x, mode="avg", **{"global": True})
    g.add("fc", x, out_features=1000)
    return g


def inception():
    g = Graph("inception", 3, 224, 224, 8, 5)
    x = g.conv("input", 64, 7, stride=2, pad=3)
    x = g.add("pool", x, kernel=3, stride=2, pad=1)
    x = g.conv(x, 64, 1)
    x = g.conv(x, 192, 3, pad=1)
    x = g.add("pool", x, kernel=3, stride=2, pad=1)

    def module(x, c1, c3r, c3, c5r, c5, cp):
        a = g.conv(x, c1, 1)
        b = g.conv(g.conv(x, c3r, 1), c3, 3, pad=1)
        c = g.conv(g.conv(x, c5r, 1), c5, 5, pad=2)
        d = g.conv(g.add("pool", x, kernel=3, stride=1, pad=1), cp, 1)
        return g.add("concat", [a, b, c, d])

    x = module(x, 64, 96, 128, 16, 32, 32)
    x = module(x, 128, 128, 192, 32, 96, 64)
    x = g.add("pool", x, kernel=3, stride=2, pad=1)
    x = module(x, 192, 96, 208, 16, 48, 64)
    x = module(x, 160, 112, 224, 24, 64, 64)
    x = module(x, 128, 128, 256, 24, 64, 64)
    x = module(x, 112, 144, 288, 32, 64, 64)
    x = module(x, 256, 160, 320, 32, 128, 128)
    x = g.add("pool", x, kernel=3, stride=2, pad=1)
    x = module(x, 256, 160, 320, 32, 128, 128)
    x = module(x, 384, 192, 384, 48, 128, 128)
    x = g.add("pool", x, mode="avg", **{"global": True})
    g.add("fc", x, out_features=1000)
    return g


def rnn(kind, name, hidden=300, embed=300, steps=35, layers=2, act_bits=2):
    # Input is the embedded token sequence, channels x steps x 1.
    g = Graph(name, embed, steps, 1, act_bits, act_bits)
    x = "input"
    for _ in range(layers):
        x = g.add(kind, x, hidden=hidden)
    return g


def main():
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).parent.parent / "workloads")
    out.mkdir(parents=True, exist_ok=True)
    for g in (alexnet(), resnet34(), inception(), rnn("lstm", "lstm_ptb", act_bits=8), rnn("gru", "gru_ptb", act_bits=6)):
        g.write(out / f"{g.doc['name']}.json")


if __name__ == "__main__":
    main()
