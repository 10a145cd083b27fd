"""Compare the compiled kernels against the plain-numpy fallback on a
fixed verification workload.

Usage:
    python3 benchmarks/kernel_vs_numpy.py [--points N] [--geo-steps N]

Each mode runs in its own subprocess because the implementation is
selected at import time (CHEEGERDEF_NO_JIT=1 forces the fallback).
"""

import sys

from cheegerdef.bench import main

if __name__ == "__main__":
    sys.exit(main())
