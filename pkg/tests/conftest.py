import numpy as np
import pytest

import fieldfusion.synth as synth
from fieldfusion import build_field, Intrinsics
from fieldfusion._kernels import warmup


@pytest.fixture(scope="session", autouse=True)
def _warm_kernel():
    # compile (or load from cache) the fused-query kernel once per session
    warmup()


@pytest.fixture(scope="session")
def small_intr():
    return Intrinsics(fx=300.0, fy=300.0, cx=159.5, cy=119.5, width=320, height=240)


@pytest.fixture(scope="session")
def box_scene(small_intr):
    """Ground plane + one box, 4 oblique corner cameras; the workhorse scene."""
    spec = synth.ProceduralFeatureSpec(dim=32, seed=3)
    center = np.array([0.0, 0.0, 0.03])
    half = np.array([0.04, 0.03, 0.03])
    prims = [synth.ground_plane(0.0, category=9, instance=1),
             synth.box(center, half, category=1, instance=2)]
    cams = synth.corner_cameras((0, 0, 0), radius=0.3, height=0.35, intr=small_intr)
    views = synth.render_views(prims, cams, spec)
    field = build_field(views, mu=0.02, delta=1e-4)
    return {"prims": prims, "cams": cams, "views": views, "field": field,
            "spec": spec, "center": center, "half": half}


@pytest.fixture(scope="session")
def sphere_scene(small_intr):
    """Floating sphere with six axis cameras (fully observed surface)."""
    spec = synth.ProceduralFeatureSpec(dim=16, seed=5)
    center = np.array([0.0, 0.0, 0.0])
    prims = [synth.sphere(center, 0.06, category=1, instance=1)]
    cams = synth.axis_cameras(center, 0.4, small_intr)
    views = synth.render_views(prims, cams, spec)
    field = build_field(views, mu=0.02, delta=1e-4)
    return {"prims": prims, "cams": cams, "views": views, "field": field,
            "spec": spec, "center": center, "radius": 0.06}
