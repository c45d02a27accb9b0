"""Select the compiled kernels when available, else the pure-Python fallback.

Set REFKIT_PURE=1 in the environment to force the fallback.
"""

import os

BACKEND = "python"

if os.environ.get("REFKIT_PURE") != "1":
    try:
        from refkit._ckernels import first_sat, line_block_counts, check_derivations, cert_ref12
        BACKEND = "cython"
    except ImportError:
        pass

if BACKEND == "python":
    from refkit._pykernels import first_sat, line_block_counts, check_derivations, cert_ref12

__all__ = ["first_sat", "line_block_counts", "check_derivations", "cert_ref12", "BACKEND"]
