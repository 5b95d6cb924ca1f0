"""Export torchvision VGG-19 convolution weights (features up to conv5_1) to the
safetensors file the feature extractor loads.

    python scripts/export_vgg19.py data/vgg19.safetensors
    python scripts/export_vgg19.py /tmp/vgg_random.safetensors --random   # format check only
"""

import argparse
import json
import struct

import torch
import torchvision

CONV_INDICES = [0, 2, 5, 7, 10, 12, 14, 16, 19, 21, 23, 25, 28]


def save_safetensors(tensors, path):
    header, blobs, offset = {}, [], 0
    for name in sorted(tensors):
        data = tensors[name].detach().to(torch.float32).contiguous().numpy().tobytes()
        header[name] = {"dtype": "F32", "shape": list(tensors[name].shape),
                        "data_offsets": [offset, offset + len(data)]}
        blobs.append(data)
        offset += len(data)
    header["__metadata__"] = {"kind": "vgg19_features"}
    encoded = json.dumps(header, separators=(",", ":")).encode()
    encoded += b" " * (-len(encoded) % 8)
    with open(path, "wb") as f:
        f.write(struct.pack("<Q", len(encoded)))
        f.write(encoded)
        for blob in blobs:
            f.write(blob)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out")
    parser.add_argument("--random", action="store_true", help="skip the download, keep random init")
    args = parser.parse_args()
    weights = None if args.random else torchvision.models.VGG19_Weights.IMAGENET1K_V1
    features = torchvision.models.vgg19(weights=weights).features
    tensors = {}
    for i in CONV_INDICES:
        tensors[f"features.{i}.weight"] = features[i].weight
        tensors[f"features.{i}.bias"] = features[i].bias
    save_safetensors(tensors, args.out)
    print(f"wrote {len(tensors)} tensors to {args.out}")


if __name__ == "__main__":
    main()
