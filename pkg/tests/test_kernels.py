import os
import subprocess
import sys

import numpy as np
import pytest

from quadsurf import kernels
from quadsurf.lattice import short_vectors


def test_forced_fallback_in_subprocess():
    code = "from quadsurf import kernels; print(kernels.BACKEND)"
    env = {**os.environ, "QSURF_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True).stdout.strip()
    assert out == "python"


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.search(backend="fortran")


@pytest.mark.skipif(not kernels.have_compiled(), reason="compiled kernels not built")
def test_short_vectors_backends_agree():
    rng = np.random.default_rng(3)
    B = rng.standard_normal((6, 6))
    a = short_vectors(B, 2.5, backend="cython")[0]
    b = short_vectors(B, 2.5, backend="python")[0]
    assert np.array_equal(a, b)
