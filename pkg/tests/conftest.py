import os

import numpy as np
import pytest

from reshade_forge.scene import (
    EnvironmentLight,
    Material,
    Plane,
    Primitive,
    Quad,
    SceneDescription,
    Sphere,
)

SCENES_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "scenes")


@pytest.fixture(scope="session")
def scenes_dir():
    return os.path.abspath(SCENES_DIR)


@pytest.fixture(scope="session")
def furnace_scene():
    """Lambertian albedo-0.8 sphere in a constant 0.5 environment."""
    return SceneDescription(
        primitives=(Primitive(shape=Sphere(center=(0, 0, -3), radius=1.0), material_index=0),),
        materials=(Material(kind="lambertian", color=(0.8, 0.8, 0.8)),),
        environment=EnvironmentLight(kind="constant", radiance=(0.5, 0.5, 0.5)),
    )


@pytest.fixture(scope="session")
def box_scene():
    """Small enclosed scene with a quad emitter and mixed materials."""
    mats = (
        Material(kind="lambertian", color=(0.7, 0.7, 0.7)),
        Material(kind="ggx_conductor", color=(0.9, 0.8, 0.6), roughness=0.15),
        Material(kind="mirror", color=(0.9, 0.9, 0.9)),
        Material(kind="lambertian", color=(0.0, 0.0, 0.0)),
    )
    prims = (
        Primitive(shape=Plane(point=(0, 0, 0), normal=(0, 1, 0)), material_index=0),
        Primitive(shape=Sphere(center=(-0.6, 0.4, -2.0), radius=0.4), material_index=1),
        Primitive(shape=Sphere(center=(0.6, 0.35, -2.2), radius=0.35), material_index=2),
        Primitive(
            shape=Quad(corner=(-0.4, 1.8, -2.4), edge_u=(0.8, 0, 0), edge_v=(0, 0, 0.8)),
            material_index=3,
            emission=(12.0, 11.0, 10.0),
        ),
    )
    return SceneDescription(
        primitives=prims,
        materials=mats,
        environment=EnvironmentLight(kind="constant", radiance=(0.15, 0.17, 0.2)),
        camera_box=((-0.3, 0.7, 0.0), (0.3, 1.2, 0.6)),
    )


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
