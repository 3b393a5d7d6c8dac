#!/usr/bin/env python3
"""Generate a desk-scale training dataset from the shipped scenes.

Equivalent to `forge dataset`; kept as a script for experiment tweaking.
Paper-scale values would be --pairs 200 --res 1280x720 --spp 8192.
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from reshade_forge.cli import main

if __name__ == "__main__":
    sys.exit(main(
        sys.argv[1:]
        or [
            "dataset",
            "--scenes", "scenes",
            "--out", "out/dataset",
            "--pairs", "8",
            "--res", "256x256",
            "--spp", "256",
            "--seed", "0",
        ]
    ))
