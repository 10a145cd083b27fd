"""Compilation switch for the numerical kernels.

Kernels are compiled with numba when it is importable and the environment
variable CHEEGERDEF_NO_JIT is unset (or falsy).  Otherwise ``njit`` degrades
to an identity decorator and every kernel runs as plain numpy, which keeps
the package importable on minimal installs and gives the benchmark a
reference interpreter path.
"""

import os


def _flag_disabled() -> bool:
    raw = os.environ.get("CHEEGERDEF_NO_JIT", "").strip().lower()
    return raw in {"1", "true", "yes", "on"}


_DISABLED = _flag_disabled()

if _DISABLED:
    HAVE_NUMBA = False
else:
    try:
        from numba import njit as _numba_njit

        HAVE_NUMBA = True
    except ImportError:
        HAVE_NUMBA = False

JIT_ENABLED = HAVE_NUMBA


if JIT_ENABLED:
    njit = _numba_njit
else:

    def njit(*args, **kwargs):
        # identity decorator, mirrors numba's two call styles
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap
