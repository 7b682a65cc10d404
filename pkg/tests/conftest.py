import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def sinc_design():
    from optspline.designer import DesignProblem, FilterTarget, IdealLowpass, default_rho_d, design

    p = DesignProblem(3, default_rho_d(3), FilterTarget(IdealLowpass()))
    return p, design(p)


def natural_images(count=None):
    """512x512 grayscale test images shipped with scikit-image, in [0, 1]."""
    data = pytest.importorskip("skimage.data")
    from skimage.color import rgb2gray

    loaders = {
        "astronaut": lambda: rgb2gray(data.astronaut()),
        "camera": lambda: data.camera() / 255.0,
        "brick": lambda: data.brick() / 255.0,
        "grass": lambda: data.grass() / 255.0,
        "gravel": lambda: data.gravel() / 255.0,
        "moon": lambda: data.moon() / 255.0,
    }
    names = sorted(loaders)[:count]
    return [(n, np.asarray(loaders[n](), dtype=float)) for n in names]


#: criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
