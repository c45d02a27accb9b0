"""Session-wide hooks.

Every call of transforms.contrapose made anywhere in the suite goes through
a wrapper that recomputes the contraposition bounds from the inputs and
fails the call when the output exceeds them.  The wrapper is installed at
import time, before test modules bind the name.
"""

import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

from refkit import transforms  # noqa: E402
from refkit.resolution import ResolutionProof  # noqa: E402

CONTRAPOSE_CALLS = []

_original = transforms.contrapose


def _checked_contrapose(proof_psi, mixed, mmap, num_vars=None):
    out, stats = _original(proof_psi, mixed, mmap, num_vars=num_vars)
    l = len(proof_psi.lines)
    s = sum(len(c) for c, _ in proof_psi.lines)
    if isinstance(mixed, ResolutionProof):
        k, t = len(mixed.lines), sum(len(c) for c, _ in mixed.lines)
    else:
        k, t = mixed.steps, mixed.size
    m = mmap.count
    psi_size = sum(len(mmap.clause(i)) for i in range(1, m + 1))
    steps = len(out.lines)
    size = sum(len(c) for c, _ in out.lines)
    ok = steps <= l + k * m and size <= s + t * m + k * psi_size
    CONTRAPOSE_CALLS.append((steps, l + k * m, size, s + t * m + k * psi_size, ok))
    assert ok, f"contraposition bound violated: {CONTRAPOSE_CALLS[-1]}"
    return out, stats


transforms.contrapose = _checked_contrapose


# acceptance results, one line per criterion, echoed at the end of the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
