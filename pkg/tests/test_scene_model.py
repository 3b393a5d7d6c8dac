import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reshade_forge.scene import (
    EnvironmentLight,
    Material,
    Plane,
    Primitive,
    Quad,
    SceneDescription,
    SceneFormatError,
    SceneValidationError,
    Sphere,
    Texture,
    add_random_orbs,
    parse_scene,
    randomize_materials,
    serialize_scene,
    validate_scene,
)

MINIMAL = """
{
  "materials": [{"kind": "lambertian", "albedo": [0.5, 0.5, 0.5]}],
  "primitives": [{"shape": "sphere", "center": [0, 0, -3], "radius": 1.0, "material": 0}],
  "environment": {"kind": "constant", "radiance": [0.5, 0.5, 0.5]}
}
"""


def test_parse_minimal_document():
    scene = parse_scene(MINIMAL)
    assert len(scene.primitives) == 1
    assert len(scene.materials) == 1
    assert scene.primitives[0].shape == Sphere(center=(0, 0, -3), radius=1.0)
    assert scene.environment.radiance == (0.5, 0.5, 0.5)


def test_parse_reports_line_and_column():
    with pytest.raises(SceneFormatError, match=r"line \d+, column \d+"):
        parse_scene('{"materials": [}')


def test_dangling_material_index():
    doc = json.loads(MINIMAL)
    doc["primitives"][0]["material"] = 5
    with pytest.raises(SceneValidationError, match="material 5"):
        parse_scene(json.dumps(doc))


def test_negative_radius_rejected():
    doc = json.loads(MINIMAL)
    doc["primitives"][0]["radius"] = -1.0
    with pytest.raises(SceneValidationError, match="radius"):
        parse_scene(json.dumps(doc))


def test_unknown_material_kind_rejected():
    doc = json.loads(MINIMAL)
    doc["materials"][0]["kind"] = "velvet"
    with pytest.raises(SceneValidationError, match="velvet"):
        parse_scene(json.dumps(doc))


def test_nonfinite_literal_rejected():
    bad = MINIMAL.replace("1.0", "NaN")
    with pytest.raises(SceneFormatError, match="non-finite"):
        parse_scene(bad)


def test_no_light_rejected():
    doc = json.loads(MINIMAL)
    doc["environment"]["radiance"] = [0, 0, 0]
    with pytest.raises(SceneValidationError, match="light"):
        parse_scene(json.dumps(doc))


def test_plane_normal_must_be_unit():
    with pytest.raises(SceneValidationError, match="unit"):
        Plane(point=(0, 0, 0), normal=(0, 2, 0))


def test_quad_edges_must_be_independent():
    with pytest.raises(SceneValidationError, match="independent"):
        Quad(corner=(0, 0, 0), edge_u=(1, 0, 0), edge_v=(2, 0, 0))


def test_roughness_clamped():
    m = Material(kind="ggx_conductor", color=(0.5, 0.5, 0.5), roughness=0.001)
    assert m.roughness == 0.01
    m = Material(kind="ggx_conductor", color=(0.5, 0.5, 0.5), roughness=3.0)
    assert m.roughness == 1.0


# -- strategies for roundtrip fuzzing ---------------------------------------

unit_interval = st.floats(0.0, 1.0)
coord = st.floats(-5.0, 5.0)
rgb01 = st.tuples(unit_interval, unit_interval, unit_interval)
vec = st.tuples(coord, coord, coord)

textures = st.one_of(
    st.none(),
    st.builds(
        Texture,
        kind=st.sampled_from(["checker", "value-noise"]),
        scale=st.floats(0.1, 8.0),
        color_a=rgb01,
        color_b=rgb01,
    ),
)
materials = st.builds(
    Material,
    kind=st.sampled_from(["lambertian", "mirror", "ggx_conductor"]),
    color=rgb01,
    roughness=st.floats(0.01, 1.0),
    texture=textures,
)
spheres = st.builds(Sphere, center=vec, radius=st.floats(0.05, 2.0))
quads = st.builds(
    Quad,
    corner=vec,
    edge_u=st.just((1.0, 0.0, 0.0)),
    edge_v=st.tuples(st.floats(-1, 1), st.just(1.0), st.floats(-1, 1)),
)
planes = st.builds(Plane, point=vec, normal=st.sampled_from([(0.0, 1.0, 0.0), (1.0, 0.0, 0.0)]))


@st.composite
def scene_docs(draw):
    mats = draw(st.lists(materials, min_size=1, max_size=4))
    n_prims = draw(st.integers(1, 5))
    prims = []
    for _ in range(n_prims):
        shape = draw(st.one_of(spheres, quads, planes))
        emissive = draw(st.booleans()) and not isinstance(shape, Plane)
        emission = (
            tuple(draw(st.floats(0.5, 30.0)) for _ in range(3)) if emissive else (0.0, 0.0, 0.0)
        )
        prims.append(
            Primitive(
                shape=shape,
                material_index=draw(st.integers(0, len(mats) - 1)),
                emission=emission,
            )
        )
    env = EnvironmentLight(kind="constant", radiance=tuple(draw(st.floats(0.05, 2.0)) for _ in range(3)))
    box = draw(st.one_of(st.none(), st.just(((-1.0, 0.0, -1.0), (1.0, 2.0, 1.0)))))
    return SceneDescription(primitives=tuple(prims), materials=tuple(mats), environment=env, camera_box=box)


@settings(max_examples=50, deadline=None)
@given(scene_docs())
def test_parse_serialize_identity(scene):
    validate_scene(scene)
    assert parse_scene(serialize_scene(scene)) == scene


@settings(max_examples=25, deadline=None)
@given(scene_docs(), st.integers(0, 2**32 - 1))
def test_randomize_keeps_scene_valid(scene, seed):
    out = add_random_orbs(randomize_materials(scene, seed), seed ^ 0xABCD, (0, 3))
    validate_scene(out)


def test_randomize_materials_deterministic():
    scene = parse_scene(MINIMAL)
    a = randomize_materials(scene, seed=7)
    b = randomize_materials(scene, seed=7)
    assert a == b
    assert a != randomize_materials(scene, seed=8)


def test_randomize_materials_ranges():
    scene = parse_scene(MINIMAL)
    for seed in range(40):
        out = randomize_materials(scene, seed)
        for m in out.materials:
            assert all(0.05 <= c <= 0.95 for c in m.color)
            assert 0.01 <= m.roughness <= 1.0
            assert m.kind in ("lambertian", "mirror", "ggx_conductor")


def test_randomize_materials_geometry_and_emitters_untouched():
    base = parse_scene(MINIMAL)
    emitter = Primitive(
        shape=Sphere(center=(1, 1, 1), radius=0.1),
        material_index=0,
        emission=(5.0, 4.0, 3.0),
    )
    scene = SceneDescription(
        primitives=base.primitives + (emitter,),
        materials=base.materials,
        environment=base.environment,
    )
    out = randomize_materials(scene, seed=3)
    assert out.primitives == scene.primitives  # geometry + emission identical
    # material 0 is referenced by the emitter, so it is protected
    assert out.materials[0] == scene.materials[0]


def test_randomize_materials_kind_mix():
    scene = parse_scene(MINIMAL)
    kinds = [randomize_materials(scene, s).materials[0].kind for s in range(400)]
    frac = {k: kinds.count(k) / len(kinds) for k in set(kinds)}
    assert abs(frac["lambertian"] - 0.50) < 0.08
    assert abs(frac["ggx_conductor"] - 0.35) < 0.08
    assert abs(frac["mirror"] - 0.15) < 0.08


def test_add_orbs_zero_range_is_identity():
    scene = parse_scene(MINIMAL)
    assert add_random_orbs(scene, 5, (0, 0)) == scene


def test_add_orbs_exact_count_and_properties():
    scene = parse_scene(MINIMAL)
    out = add_random_orbs(scene, 11, (3, 3))
    new = out.primitives[len(scene.primitives):]
    assert len(new) == 3
    for orb in new:
        assert isinstance(orb.shape, Sphere)
        assert orb.is_emissive
        lum = np.array(orb.emission) @ (0.2126, 0.7152, 0.0722)
        assert 5.0 - 1e-6 <= lum <= 50.0 + 1e-6


def test_add_orbs_deterministic():
    scene = parse_scene(MINIMAL)
    assert add_random_orbs(scene, 42, (1, 4)) == add_random_orbs(scene, 42, (1, 4))
