#!/usr/bin/env python3
"""Writes data/alexnet_branchy.profile.

The numbers are synthetic: shapes follow AlexNet at 224x224 (batch 1, float32),
latencies are hand-picked to resemble a small ARM board (device) and a desktop
GPU (edge). Exit heads are folded into the shared layer chain.
"""
import argparse
import json

CPU_HZ = 1.5e9

# name, kind, device ms, edge ms, output elements, sparsity override
LAYERS = [
    ("conv1", "convolution", 62.0, 2.10, 64 * 55 * 55, None),
    ("relu1", "activation", 6.0, 0.20, 64 * 55 * 55, None),
    ("pool1", "pooling", 9.0, 0.30, 64 * 27 * 27, 0.5),
    ("lrn1", "normalization", 14.0, 0.50, 64 * 27 * 27, 0.5),
    ("conv2", "convolution", 118.0, 3.40, 192 * 27 * 27, None),
    ("relu2", "activation", 4.0, 0.15, 192 * 27 * 27, None),
    ("pool2", "pooling", 5.0, 0.20, 192 * 13 * 13, 0.5),
    ("conv3", "convolution", 66.0, 1.90, 384 * 13 * 13, None),
    ("relu3", "activation", 2.0, 0.08, 384 * 13 * 13, None),
    ("conv4", "convolution", 72.0, 0.50, 256 * 13 * 13, None),
    ("relu4", "activation", 1.5, 0.03, 256 * 13 * 13, None),
    ("pool3", "pooling", 1.2, 0.03, 256 * 6 * 6, 0.5),
    ("conv5", "convolution", 38.0, 0.30, 256 * 6 * 6, None),
    ("relu5", "activation", 0.5, 0.02, 256 * 6 * 6, None),
    ("pool4", "pooling", 0.4, 0.02, 256 * 3 * 3, 0.5),
    ("fc1", "fully_connected", 52.0, 0.25, 4096, None),
    ("relu6", "activation", 0.2, 0.01, 4096, None),
    ("fc2", "fully_connected", 24.0, 0.12, 4096, None),
    ("relu7", "activation", 0.2, 0.01, 4096, None),
    ("fc3", "fully_connected", 6.0, 0.04, 1000, None),
]

EXITS = [(1, 9, 0.787), (2, 12, 0.817), (3, 20, 0.836)]

KIND_DROPS = {
    "input": {"8": 0.005, "12": 0.0015, "16": 0.0004},
    "convolution": {"8": 0.045, "12": 0.012, "16": 0.004},
    "fully_connected": {"8": 0.04, "12": 0.01, "16": 0.003},
    "activation": {"8": 0.006, "12": 0.002, "16": 0.0005},
    "pooling": {"8": 0.008, "12": 0.0025, "16": 0.0008},
    "normalization": {"8": 0.01, "12": 0.003, "16": 0.001},
}


def build():
    input_bytes = 3 * 224 * 224 * 4
    layers = []
    prev = input_bytes
    for name, kind, dev_ms, edge_ms, elems, sparsity in LAYERS:
        cycles = dev_ms / 1000.0 * CPU_HZ
        layer = {
            "name": name,
            "kind": kind,
            "device_latency_ms": dev_ms,
            "edge_latency_ms": edge_ms,
            "output_bytes": elems * 4,
            "intensity": round(cycles / prev, 6),
            "processed_bytes": prev,
        }
        if sparsity is not None:
            layer["sparsity"] = sparsity
        layers.append(layer)
        prev = elems * 4
    return {
        "version": 1,
        "name": "alexnet_branchy",
        "input_bytes": input_bytes,
        "layers": layers,
        "exits": [{"id": i, "layer_count": n, "accuracy": acc} for i, n, acc in EXITS],
        "device": {
            "k0": 1e-27,
            "cpu_hz": CPU_HZ,
            "tx_power_w": 0.5,
            "sinr": 1.0,
            "energy_budget_j": None,
        },
        "quant_accuracy": {"entries": [], "kind_defaults": KIND_DROPS},
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-o", "--output", default="data/alexnet_branchy.profile")
    args = ap.parse_args()
    with open(args.output, "w") as f:
        json.dump(build(), f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
