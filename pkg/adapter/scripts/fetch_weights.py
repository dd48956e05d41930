#!/usr/bin/env python3
"""Download the foundation-model checkpoints the adapter can use.

Requires network access to the Hugging Face hub and the [models] extra
(torch + transformers). The weight-free built-ins (patch-projection
backbone, color-region segmenter, IoU propagator) need nothing from here.

XMem note: there is no transformers port; to use video propagation with
XMem, clone https://github.com/hkchengrex/XMem, download its released
checkpoint, and wrap it behind the MaskPropagator interface in
fieldadapter/propagate.py.
"""

import argparse
import sys

MODELS = {
    "dinov2": "facebook/dinov2-small",
    "grounding-dino": "IDEA-Research/grounding-dino-tiny",
    "sam": "facebook/sam-vit-base",
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("names", nargs="*", default=list(MODELS),
                        help=f"subset of {sorted(MODELS)} (default: all)")
    args = parser.parse_args()
    try:
        from huggingface_hub import snapshot_download
    except ImportError:
        print("huggingface_hub is required: pip install huggingface_hub",
              file=sys.stderr)
        return 1
    for name in args.names or list(MODELS):
        repo = MODELS[name]
        print(f"fetching {name}: {repo}")
        snapshot_download(repo)
    print("done; transformers will load the cached weights automatically")
    return 0


if __name__ == "__main__":
    sys.exit(main())
