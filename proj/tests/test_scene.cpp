#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include <modesel/scene.hpp>

#include "testutil.hpp"

using namespace modesel;

namespace {

Region2 square_aoi(double half) {
  return Region2{Polygon2{{{-half, -half}, {half, -half}, {half, half}, {-half, half}}}};
}

Building unit_box(int id, double x0, double y0, double w, double d, double h,
                  double base = 0.0) {
  return Building{id,
                  Polygon2{{{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + d}, {x0, y0 + d}}},
                  base, base + h};
}

}  // namespace

TEST_CASE("box building produces four outward walls and a roof") {
  const Building b = unit_box(7, 0, 0, 2, 1, 3);
  const auto faces = building_faces(b, 0);
  REQUIRE(faces.size() == 5);

  int n_top = 0;
  std::map<int, Vec3> normals;
  for (const auto& f : faces) {
    CHECK(f.building_id == 7);
    if (f.is_top) {
      ++n_top;
      CHECK(f.plane().unit_normal.z == Catch::Approx(1.0).margin(1e-12));
      CHECK(f.polygon.vertices().size() == 4);
    } else {
      CHECK(std::abs(f.plane().unit_normal.z) < 1e-12);
      normals[f.id] = f.plane().unit_normal;
    }
  }
  CHECK(n_top == 1);
  REQUIRE(normals.size() == 4);

  // Walls follow footprint edges in order: -y, +x, +y, -x.
  CHECK(normals[0].y == Catch::Approx(-1.0).margin(1e-12));
  CHECK(normals[1].x == Catch::Approx(1.0).margin(1e-12));
  CHECK(normals[2].y == Catch::Approx(1.0).margin(1e-12));
  CHECK(normals[3].x == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("wall normals point away from the footprint centroid") {
  testutil::Rng rng(404);
  for (int trial = 0; trial < 50; ++trial) {
    Building b;
    b.id = trial;
    b.footprint = testutil::random_convex_polygon(rng, -30, -30, 30, 30,
                                                  3 + rng.below(6));
    b.base_z = rng.uniform(-2, 2);
    b.top_z = b.base_z + rng.uniform(5, 40);
    const Vec2 c = b.footprint.centroid();
    for (const auto& f : building_faces(b, 0)) {
      if (f.is_top) continue;
      const Vec2 fc = f.polygon.centroid().xy();
      const Vec3 n = f.plane().unit_normal;
      CHECK((fc - c).dot({n.x, n.y}) > 0.0);
    }
  }
}

TEST_CASE("face areas match the analytic lateral surface plus roof") {
  // 4 x 3 footprint, height 10: lateral 2*(4+3)*10 = 140, roof 12.
  const Building b = unit_box(0, -2, -1.5, 4, 3, 10);
  const auto faces = building_faces(b, 0);
  double total = 0;
  for (const auto& f : faces) {
    const auto& vs = f.polygon.vertices();
    // Shoelace in the face's own plane via the triangle fan from vertex 0.
    double area = 0;
    for (std::size_t i = 1; i + 1 < vs.size(); ++i)
      area += 0.5 * (vs[i] - vs[0]).cross(vs[i + 1] - vs[0]).norm();
    total += area;
  }
  CHECK(total == Catch::Approx(140.0 + 12.0).margin(1e-9));
}

TEST_CASE("scene assigns globally sequential face ids") {
  const Scene s({unit_box(0, 0, 0, 1, 1, 5), unit_box(1, 3, 0, 2, 2, 8)}, 0.0,
                1.5, square_aoi(20));
  REQUIRE(s.faces().size() == 10);
  for (std::size_t i = 0; i < s.faces().size(); ++i) {
    CHECK(s.faces()[i].id == int(i));
    REQUIRE(s.face_polygons()[i].vertices().size() ==
            s.faces()[i].polygon.vertices().size());
    CHECK(s.face_polygons()[i].vertices()[0].x ==
          s.faces()[i].polygon.vertices()[0].x);
    CHECK(s.face_polygons()[i].vertices()[0].z ==
          s.faces()[i].polygon.vertices()[0].z);
  }
  CHECK(s.receiver_plane_z() == Catch::Approx(1.5));
}

TEST_CASE("invalid inputs are rejected with telling messages") {
  CHECK_THROWS_WITH(
      Scene({Building{0,
                      Polygon2{{{0, 0}, {4, 0}, {4, 4}, {2, 1}, {0, 4}}},
                      0.0, 10.0}},
            0.0, 1.5, square_aoi(20)),
      Catch::Matchers::ContainsSubstring("convex"));
  CHECK_THROWS_WITH(
      Scene({Building{3, Polygon2{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}, 5.0, 5.0}},
            0.0, 1.5, square_aoi(20)),
      Catch::Matchers::ContainsSubstring("top_z"));
  CHECK_THROWS_WITH(Scene({}, 0.0, -1.0, square_aoi(20)),
                    Catch::Matchers::ContainsSubstring("receiver_height"));

  CHECK_THROWS_WITH(Epoch({}), Catch::Matchers::ContainsSubstring("observation"));
  CHECK_THROWS_WITH(
      Epoch({SatelliteObservation{4, {0, 0, 2e7}, 2e7},
             SatelliteObservation{4, {1e7, 0, 1e7}, 2e7}}),
      Catch::Matchers::ContainsSubstring("duplicate"));
  CHECK_THROWS_WITH(Epoch({SatelliteObservation{1, {0, 0, 100.0}, 200.0}}),
                    Catch::Matchers::ContainsSubstring("far field"));
  CHECK_THROWS_WITH(Epoch({SatelliteObservation{1, {0, 0, 2e7}, -5.0}}),
                    Catch::Matchers::ContainsSubstring("pseudorange"));
}

TEST_CASE("epoch sorts observations by sat_id") {
  const Epoch e({SatelliteObservation{9, {0, 0, 2e7}, 2e7},
                 SatelliteObservation{2, {1e7, 0, 2e7}, 2.1e7},
                 SatelliteObservation{5, {0, 1e7, 2e7}, 2.2e7}});
  REQUIRE(e.size() == 3);
  CHECK(e.observations()[0].sat_id == 2);
  CHECK(e.observations()[1].sat_id == 5);
  CHECK(e.observations()[2].sat_id == 9);
}

TEST_CASE("scene and epoch survive a JSON round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "modesel_scene_rt";
  fs::create_directories(dir);

  const Scene s({unit_box(0, -10.25, 3.5, 12.125, 8.0, 25.5),
                 unit_box(1, 4.0, -9.0, 6.0, 5.0, 18.0, 0.5)},
                0.25, 1.8, square_aoi(30));
  const std::string scene_path = (dir / "scene.json").string();
  save_scene(scene_path, s);
  const Scene s2 = load_scene(scene_path);

  REQUIRE(s2.buildings().size() == s.buildings().size());
  for (std::size_t i = 0; i < s.buildings().size(); ++i) {
    const auto& a = s.buildings()[i];
    const auto& b = s2.buildings()[i];
    CHECK(a.id == b.id);
    CHECK(a.base_z == b.base_z);
    CHECK(a.top_z == b.top_z);
    REQUIRE(a.footprint.vertices.size() == b.footprint.vertices.size());
    for (std::size_t k = 0; k < a.footprint.vertices.size(); ++k) {
      CHECK(a.footprint.vertices[k].x == b.footprint.vertices[k].x);
      CHECK(a.footprint.vertices[k].y == b.footprint.vertices[k].y);
    }
  }
  CHECK(s2.ground_z() == s.ground_z());
  CHECK(s2.receiver_plane_z() == s.receiver_plane_z());
  CHECK(s2.faces().size() == s.faces().size());

  const Epoch e({SatelliteObservation{12, {1.5e7, -0.75e7, 2.1e7}, 2.65e7},
                 SatelliteObservation{3, {-0.5e7, 1.25e7, 1.9e7}, 2.4e7}},
                TruthState{{1.25, -3.5, 1.8}, 4.375});
  const std::string epoch_path = (dir / "epoch.json").string();
  save_epoch(epoch_path, e);
  const Epoch e2 = load_epoch(epoch_path);

  REQUIRE(e2.size() == e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    CHECK(e2.observations()[i].sat_id == e.observations()[i].sat_id);
    CHECK(e2.observations()[i].pseudorange == e.observations()[i].pseudorange);
    CHECK(e2.observations()[i].position.x == e.observations()[i].position.x);
    CHECK(e2.observations()[i].position.z == e.observations()[i].position.z);
  }
  REQUIRE(e2.truth().has_value());
  CHECK(e2.truth()->clock_bias == e.truth()->clock_bias);
  CHECK(e2.truth()->position.y == e.truth()->position.y);

  CHECK_THROWS_WITH(load_scene((dir / "missing.json").string()),
                    Catch::Matchers::ContainsSubstring("cannot open"));
  fs::remove_all(dir);
}

TEST_CASE("clockwise footprints are normalized, not rejected") {
  Building b{0, Polygon2{{{0, 1}, {1, 1}, {1, 0}, {0, 0}}}, 0.0, 4.0};
  const Scene s({b}, 0.0, 1.5, square_aoi(10));
  CHECK(s.buildings()[0].footprint.signed_area() > 0);
  for (const auto& f : s.faces()) {
    if (f.is_top) continue;
    const Vec2 fc = f.polygon.centroid().xy();
    const Vec3 n = f.plane().unit_normal;
    CHECK((fc - Vec2{0.5, 0.5}).dot({n.x, n.y}) > 0.0);
  }
}
