#include "objcomp/camera.hpp"
#include "objcomp/environment.hpp"
#include "objcomp/image.hpp"
#include "objcomp/image_io.hpp"
#include "objcomp/mesh.hpp"
#include "objcomp/primitives.hpp"
#include "objcomp/texture.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace objcomp;
using oracle::TempDir;

namespace {

TriangleMesh parse(const std::string& text) {
    std::istringstream in(text);
    return parse_mesh(in, "test.obj");
}

const char* kUnitQuad = R"(# unit quad
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
vt 0 0
vt 1 0
vt 1 1
vt 0 1
vn 0 0 1
f 1/1/1 2/2/1 3/3/1
f 1/1/1 3/3/1 4/4/1
)";

const char* kCubeQuads = R"(v -1 -1 -1
v 1 -1 -1
v 1 1 -1
v -1 1 -1
v -1 -1 1
v 1 -1 1
v 1 1 1
v -1 1 1
f 1 4 3 2
f 5 6 7 8
f 1 2 6 5
f 4 8 7 3
f 1 5 8 4
f 2 3 7 6
)";

} // namespace

TEST(MeshLoad, UnitQuad) {
    const TriangleMesh m = parse(kUnitQuad);
    EXPECT_EQ(m.triangle_count(), 2u);
    EXPECT_EQ(m.positions.size(), 4u);
    EXPECT_EQ(m.uv_array().size(), 4u);
    EXPECT_EQ(m.faces()[1][2].uv, 3u);
}

TEST(MeshLoad, OutOfRangeIndexReportsLine) {
    const std::string text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 9\n";
    try {
        parse(text);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 5u);
        EXPECT_NE(std::string(e.what()).find("out of range"), std::string::npos) << e.what();
    }
}

TEST(MeshLoad, MalformedNumberReportsLine) {
    try {
        parse("v 0 0 0\nv 1 x 0\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(MeshLoad, ZeroTrianglesIsAnError) { EXPECT_THROW(parse("v 0 0 0\nv 1 0 0\n"), DataError); }

TEST(MeshLoad, NegativeIndicesAreRelative) {
    const TriangleMesh m = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n");
    EXPECT_EQ(m.faces()[0][0].position, 0u);
    EXPECT_EQ(m.faces()[0][2].position, 2u);
}

TEST(MeshLoad, CubeWithoutNormalsGetsDiagonalNormals) {
    const TriangleMesh m = parse(kCubeQuads);
    EXPECT_EQ(m.triangle_count(), 12u);
    ASSERT_EQ(m.normals.size(), 8u);
    for (const Triangle& t : m.faces()) {
        for (const Corner& c : t) {
            const Vec3 expected = m.positions[c.position].normalized();
            const Vec3& n = m.normals[c.normal];
            EXPECT_NEAR(n.norm(), 1.0, 1e-12);
            EXPECT_LT((n - expected).norm(), 1e-12);
        }
    }
}

TEST(MeshLoad, NormalsAreNormalizedAndUvsWrapped) {
    const TriangleMesh m = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 1.25 -0.25\nvt 1 0\nvt 0.5 2.5\nvn 0 0 5\n"
                                 "f 1/1/1 2/2/1 3/3/1\n");
    EXPECT_NEAR(m.normals[0].norm(), 1.0, 1e-12);
    EXPECT_NEAR(m.uv_array()[0].x(), 0.25, 1e-15);
    EXPECT_NEAR(m.uv_array()[0].y(), 0.75, 1e-15);
    EXPECT_EQ(m.uv_array()[1].x(), 1.0); // on the boundary, kept
    EXPECT_NEAR(m.uv_array()[2].y(), 0.5, 1e-15);
    for (const Vec2& uv : m.uv_array()) {
        EXPECT_TRUE(uv.x() >= 0.0 && uv.x() <= 1.0 && uv.y() >= 0.0 && uv.y() <= 1.0);
    }
}

TEST(MeshLoad, SaveLoadRoundTrip) {
    TempDir dir("mesh");
    const TriangleMesh m = make_uv_sphere(Vec3(0.1, -0.2, 0.3), 0.7, 6, 10);
    save_mesh(m, dir / "s.obj");
    const TriangleMesh back = load_mesh(dir / "s.obj");
    ASSERT_EQ(back.triangle_count(), m.triangle_count());
    for (std::size_t t = 0; t < m.triangle_count(); ++t) {
        EXPECT_EQ(back.faces()[t], m.faces()[t]);
    }
    ASSERT_EQ(back.positions.size(), m.positions.size());
    for (std::size_t i = 0; i < m.positions.size(); ++i) {
        EXPECT_LT((back.positions[i] - m.positions[i]).norm(), 1e-6);
    }
}

TEST(MeshLoad, MissingFileIsDataError) { EXPECT_THROW(load_mesh("/nonexistent/mesh.obj"), DataError); }

TEST(ImageIo, GammaEndpoints) {
    EXPECT_EQ(gamma_decode(255), 1.0);
    EXPECT_EQ(gamma_decode(0), 0.0);
}

TEST(ImageIo, GammaRoundTripIsIdentityOn8Bit) {
    for (int v = 0; v < 256; ++v) {
        EXPECT_EQ(gamma_encode(gamma_decode(static_cast<std::uint8_t>(v))), v);
    }
}

TEST(ImageIo, FloatMapRoundTripIsBitExact) {
    TempDir dir("pfm");
    ImageBuffer img(3, 2, 3);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<float> d(-10.f, 10.f);
    for (double& v : img.values()) {
        v = d(rng);
    }
    img.at(0, 0, 0) = static_cast<float>(0.123456);
    save_image(img, dir / "a.pfm");
    const ImageBuffer back = load_image(dir / "a.pfm");
    EXPECT_EQ(back, img);
    EXPECT_NEAR(back.at(0, 0, 0), 0.123456, 1e-7);

    ImageBuffer gray(4, 3, 1);
    gray.at(3, 2, 0) = 0.5;
    save_image(gray, dir / "g.pfm");
    EXPECT_EQ(load_image(dir / "g.pfm"), gray);
}

TEST(ImageIo, BigEndianFloatMapIsReadCorrectly) {
    TempDir dir("pfm");
    std::string bytes = "Pf\n2 1\n1.0\n";
    for (float f : {1.5f, -2.0f}) {
        const auto bits = std::bit_cast<std::uint32_t>(f);
        for (int s = 24; s >= 0; s -= 8) {
            bytes.push_back(static_cast<char>((bits >> s) & 0xff));
        }
    }
    oracle::write_text(dir / "be.pfm", bytes);
    const ImageBuffer img = load_image(dir / "be.pfm");
    EXPECT_EQ(img.at(0, 0, 0), 1.5);
    EXPECT_EQ(img.at(1, 0, 0), -2.0);
}

TEST(ImageIo, TruncatedAndUnsupportedFiles) {
    TempDir dir("pfm");
    oracle::write_text(dir / "t.pfm", "PF\n4 4\n-1.0\nabc");
    EXPECT_THROW(load_image(dir / "t.pfm"), DataError);
    oracle::write_text(dir / "x.bmp", "BM");
    EXPECT_THROW(load_image(dir / "x.bmp"), DataError);
    oracle::write_text(dir / "bad.png", "not a png");
    EXPECT_THROW(load_image(dir / "bad.png"), DataError);
    EXPECT_THROW(save_image(ImageBuffer(2, 2, 4), dir / "rgba.pfm"), DataError);
}

TEST(ImageIo, PngRoundTripKeepsAlphaLinear) {
    TempDir dir("png");
    ImageBuffer img(2, 2, 4);
    img.set_rgb(0, Rgb(1.0, 0.0, gamma_decode(128)));
    img.at(0, 3) = 1.0;
    img.at(1, 3) = 128.0 / 255.0;
    save_image(img, dir / "a.png");
    const ImageBuffer back = load_image(dir / "a.png");
    ASSERT_EQ(back.channels(), 4);
    EXPECT_EQ(back.at(0, 0), 1.0);
    EXPECT_EQ(back.at(0, 2), gamma_decode(128));
    EXPECT_EQ(back.at(1, 3), 128.0 / 255.0);
    EXPECT_EQ(back.at(2, 3), 0.0);
}

TEST(Mask, FromAlpha) {
    ImageBuffer opaque(3, 2, 4, 1.0);
    EXPECT_EQ(mask_from_alpha(opaque, 0.5).count(), 6u);
    ImageBuffer clear(3, 2, 4, 0.0);
    EXPECT_EQ(mask_from_alpha(clear, 0.5).count(), 0u);

    ImageBuffer checker(4, 4, 4);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            checker.at(x, y, 3) = (x + y) % 2 == 0 ? 1.0 : 0.0;
        }
    }
    const ObjectMask m = mask_from_alpha(checker, 0.5);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            EXPECT_EQ(m.test(x, y), (x + y) % 2 == 0);
        }
    }
    EXPECT_THROW(mask_from_alpha(ImageBuffer(2, 2, 3), 0.5), DataError);
}

TEST(Mask, ThresholdIsStrict) {
    ImageBuffer img(1, 1, 1, 0.5);
    EXPECT_FALSE(mask_from_alpha(img, 0.5)[0]);
    EXPECT_TRUE(mask_from_alpha(img, 0.49)[0]);
}

TEST(CameraModel, JsonRoundTrip) {
    TempDir dir("cam");
    const Camera cam = look_at(Vec3(1, 2, 3), Vec3::Zero(), Vec3::UnitY(), 0.8, 40, 30, 0.1, 50.0);
    save_camera(cam, dir / "c.json");
    const Camera back = load_camera(dir / "c.json");
    EXPECT_EQ(back.fx, cam.fx);
    EXPECT_EQ(back.cy, cam.cy);
    EXPECT_EQ(back.width, 40);
    EXPECT_EQ(back.far, 50.0);
    EXPECT_EQ(back.world_to_camera, cam.world_to_camera);
}

TEST(CameraModel, RejectsInvalidCameras) {
    Camera c = oracle::pinhole(10, 5, 5, 10, 10);
    EXPECT_NO_THROW(c.validate());
    c.fx = 0.0;
    EXPECT_THROW(c.validate(), DataError);
    c = oracle::pinhole(10, 5, 5, 10, 10);
    c.near = 2.0;
    c.far = 1.0;
    EXPECT_THROW(c.validate(), DataError);
    c = oracle::pinhole(10, 5, 5, 10, 10);
    c.world_to_camera(0, 0) = 1.1;
    EXPECT_THROW(c.validate(), DataError);
}

TEST(CameraModel, LookAtProjectsTargetToCentre) {
    const Camera cam = look_at(Vec3(0, 1, 5), Vec3(0, 1, 0), Vec3::UnitY(), 0.9, 64, 48);
    const Vec2 p = cam.project_world(Vec3(0, 1, 0));
    EXPECT_NEAR(p.x(), 32.0, 1e-12);
    EXPECT_NEAR(p.y(), 24.0, 1e-12);
    // +y in the world appears above the centre (smaller row).
    EXPECT_LT(cam.project_world(Vec3(0, 2, 0)).y(), 24.0);
    EXPECT_LT((cam.center() - Vec3(0, 1, 5)).norm(), 1e-12);
    const Ray r = cam.pixel_ray(32.0, 24.0);
    EXPECT_LT((r.direction - Vec3(0, 0, -1)).norm(), 1e-12);
}

TEST(Texture, BilinearMatchesLonghandReference) {
    std::mt19937_64 rng(3);
    const UVTexture tex = oracle::random_texture(rng, 5, 3);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double u = d(rng);
        const double v = d(rng);
        const TexelTaps taps = bilinear_taps(tex.width(), tex.height(), Vec2(u, v));
        double sum = 0.0;
        for (double w : taps.weight) {
            EXPECT_GE(w, 0.0);
            sum += w;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
        EXPECT_LT((sample(tex, Vec2(u, v)) - oracle::bilinear_reference(tex, u, v)).abs().maxCoeff(), 1e-12);
    }
}

TEST(Texture, TexelCentreHasSingleTap) {
    const TexelTaps taps = bilinear_taps(4, 4, Vec2(2.5 / 4.0, 1.0 - 1.5 / 4.0));
    EXPECT_EQ(taps.index[0], 1u * 4 + 2);
    EXPECT_EQ(taps.weight[0], 1.0);
    EXPECT_EQ(taps.weight[1] + taps.weight[2] + taps.weight[3], 0.0);
}

TEST(Texture, RejectsNegativeValues) {
    UVTexture t(2, 2, Rgb::Constant(0.5));
    EXPECT_NO_THROW(t.validate());
    t.set(3, Rgb(0.1, -0.1, 0.2));
    EXPECT_THROW(t.validate(), DataError);
}

TEST(Environment, DirectionTexelMappingAndSolidAngle) {
    const EnvironmentLight env(16, 8);
    double total = 0.0;
    for (int row = 0; row < env.height(); ++row) {
        total += env.solid_angle(row) * env.width();
        for (int col = 0; col < env.width(); ++col) {
            const Vec3 d = env.texel_center_direction(col, row);
            EXPECT_NEAR(d.norm(), 1.0, 1e-12);
            EXPECT_EQ(env.texel_index(d), static_cast<std::size_t>(row) * env.width() + col);
        }
    }
    EXPECT_NEAR(total, 4.0 * kPi, 1e-12);
    EXPECT_EQ(env.texel_index(Vec3::UnitY()) / env.width(), 0u);
    EXPECT_EQ(env.texel_index(-Vec3::UnitY()) / env.width(), 7u);
    EXPECT_THROW(EnvironmentLight(10, 4), std::invalid_argument);
}
