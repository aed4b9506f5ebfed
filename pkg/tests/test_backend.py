import os
import subprocess
import sys

import pytest

from kinemetrica import backend

PROBE = "from kinemetrica import backend; print(backend.NAME)"


def _probe(value):
    env = dict(os.environ, KINEMETRICA_BACKEND=value)
    return subprocess.run([sys.executable, "-c", PROBE], env=env, capture_output=True, text=True)


def test_python_backend_can_be_forced():
    assert _probe("python").stdout.strip() == "python"


@pytest.mark.skipif("compiled" not in backend.available(), reason="extension not built")
def test_auto_prefers_compiled():
    assert _probe("auto").stdout.strip() == "compiled"


def test_unknown_backend_name():
    with pytest.raises(ValueError):
        backend.get("fortran")


def test_estimates_agree_across_backends():
    code = (
        "from kinemetrica import estimators as E, bodies as B, curves as C;"
        "r = E.estimate_mean_traversed_length(3, B.annulus(0.5, 1.0),"
        " C.pearson_process(C.StepLengthLaw.exponential(0.2), 4.0), 3000);"
        "print(repr(r.estimate))"
    )
    values = set()
    for name in backend.available():
        env = dict(os.environ, KINEMETRICA_BACKEND=name)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        values.add(float(out.stdout))
    assert max(values) - min(values) < 1e-9
