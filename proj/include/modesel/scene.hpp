// City model and per-epoch measurement containers. Buildings are convex
// extruded prisms; faces are generated with outward normals, no bottom face.
// File formats: plain JSON, all lengths in meters (local ENU frame).
#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "geometry.hpp"

namespace modesel {

struct Building {
  int id = 0;
  Polygon2 footprint;  // convex, counterclockwise
  double base_z = 0.0;
  double top_z = 0.0;
};

struct Face {
  int id = 0;
  int building_id = 0;
  bool is_top = false;
  Polygon3 polygon;

  const Plane3& plane() const { return polygon.plane(); }
};

namespace detail {

inline void validate_convex_ccw(Polygon2& poly, const std::string& what) {
  if (poly.vertices.size() < 3)
    throw std::runtime_error(what + ": needs >= 3 vertices");
  if (poly.signed_area() < 0)
    std::reverse(poly.vertices.begin(), poly.vertices.end());
  if (poly.area() <= 0)
    throw std::runtime_error(what + ": degenerate footprint");
  const std::size_t n = poly.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e1 = poly.vertices[(i + 1) % n] - poly.vertices[i];
    const Vec2 e2 = poly.vertices[(i + 2) % n] - poly.vertices[(i + 1) % n];
    if (e1.cross(e2) < -1e-9)
      throw std::runtime_error(what + ": footprint must be convex");
  }
}

}  // namespace detail

// Wall faces along each footprint edge plus the roof. Wall normals are
// horizontal and outward, the roof normal is +z and flagged is_top. No
// bottom face is generated.
inline std::vector<Face> building_faces(const Building& b, int first_face_id) {
  std::vector<Face> faces;
  const auto& fp = b.footprint.vertices;
  const std::size_t n = fp.size();
  int id = first_face_id;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = fp[i];
    const Vec2& q = fp[(i + 1) % n];
    // CCW footprint makes (p base, q base, q top, p top) outward-oriented.
    faces.push_back(Face{id++, b.id, false,
                         Polygon3{{{p.x, p.y, b.base_z},
                                   {q.x, q.y, b.base_z},
                                   {q.x, q.y, b.top_z},
                                   {p.x, p.y, b.top_z}}}});
  }
  std::vector<Vec3> roof;
  roof.reserve(n);
  for (const auto& v : fp) roof.push_back({v.x, v.y, b.top_z});
  faces.push_back(Face{id++, b.id, true, Polygon3{std::move(roof)}});
  return faces;
}

class Scene {
 public:
  Scene(std::vector<Building> buildings, double ground_z,
        double receiver_height, Region2 aoi)
      : buildings_(std::move(buildings)),
        ground_z_(ground_z),
        receiver_height_(receiver_height),
        aoi_(std::move(aoi)) {
    if (aoi_.empty() || aoi_.area() <= 0)
      throw std::runtime_error("scene: aoi must be non-empty");
    if (receiver_height_ < 0)
      throw std::runtime_error("scene: receiver_height must be >= 0");
    int face_id = 0;
    for (auto& b : buildings_) {
      detail::validate_convex_ccw(b.footprint,
                                  "building " + std::to_string(b.id));
      if (!(b.top_z > b.base_z))
        throw std::runtime_error("building " + std::to_string(b.id) +
                                 ": top_z must exceed base_z");
      auto faces = building_faces(b, face_id);
      face_id += int(faces.size());
      for (auto& f : faces) {
        face_polygons_.push_back(f.polygon);
        faces_.push_back(std::move(f));
      }
    }
  }

  const std::vector<Building>& buildings() const { return buildings_; }
  const std::vector<Face>& faces() const { return faces_; }
  // Parallel array of face polygons; index == face id.
  const std::vector<Polygon3>& face_polygons() const { return face_polygons_; }
  double ground_z() const { return ground_z_; }
  double receiver_height() const { return receiver_height_; }
  double receiver_plane_z() const { return ground_z_ + receiver_height_; }
  const Region2& aoi() const { return aoi_; }
  Vec2 aoi_centroid() const { return aoi_.centroid(); }

 private:
  std::vector<Building> buildings_;
  double ground_z_;
  double receiver_height_;
  Region2 aoi_;
  std::vector<Face> faces_;
  std::vector<Polygon3> face_polygons_;
};

struct SatelliteObservation {
  int sat_id = 0;
  Vec3 position;       // ENU meters, far field
  double pseudorange;  // meters, atmosphere-corrected
};

struct TruthState {
  Vec3 position;
  double clock_bias = 0.0;  // meters
};

// One measurement epoch. Observations are kept sorted by sat_id so that
// downstream results do not depend on input ordering.
class Epoch {
 public:
  Epoch(std::vector<SatelliteObservation> observations,
        std::optional<TruthState> truth = std::nullopt)
      : observations_(std::move(observations)), truth_(truth) {
    if (observations_.empty())
      throw std::runtime_error("epoch: needs >= 1 observation");
    std::sort(observations_.begin(), observations_.end(),
              [](const auto& a, const auto& b) { return a.sat_id < b.sat_id; });
    for (std::size_t i = 0; i < observations_.size(); ++i) {
      const auto& o = observations_[i];
      if (i > 0 && o.sat_id == observations_[i - 1].sat_id)
        throw std::runtime_error("epoch: duplicate sat_id " +
                                 std::to_string(o.sat_id));
      if (!(o.pseudorange > 0))
        throw std::runtime_error("epoch: pseudorange must be > 0");
      if (o.position.norm() < 1e6)
        throw std::runtime_error("epoch: satellite below far field (|pos| >= 1e6 m)");
      if (!o.position.finite())
        throw std::runtime_error("epoch: satellite position must be finite");
    }
  }

  const std::vector<SatelliteObservation>& observations() const {
    return observations_;
  }
  std::size_t size() const { return observations_.size(); }
  const std::optional<TruthState>& truth() const { return truth_; }

 private:
  std::vector<SatelliteObservation> observations_;
  std::optional<TruthState> truth_;
};

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

namespace jsonio {

using nlohmann::json;

inline json polygon2_to_json(const Polygon2& p) {
  json arr = json::array();
  for (const auto& v : p.vertices) arr.push_back({v.x, v.y});
  return arr;
}

inline Polygon2 polygon2_from_json(const json& arr, const std::string& what) {
  if (!arr.is_array() || arr.size() < 3)
    throw std::runtime_error(what + ": polygon needs >= 3 [x,y] pairs");
  Polygon2 p;
  for (const auto& v : arr) {
    if (!v.is_array() || v.size() != 2)
      throw std::runtime_error(what + ": vertex must be [x,y]");
    p.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
  }
  return p;
}

inline json vec3_to_json(const Vec3& v) { return json{v.x, v.y, v.z}; }

inline Vec3 vec3_from_json(const json& a, const std::string& what) {
  if (!a.is_array() || a.size() != 3)
    throw std::runtime_error(what + ": expected [x,y,z]");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

inline json scene_to_json(const Scene& s) {
  json j;
  j["ground_z"] = s.ground_z();
  j["receiver_height"] = s.receiver_height();
  // The AOI is stored as a single polygon; multi-piece AOIs are not part of
  // the file schema.
  if (s.aoi().pieces.size() != 1)
    throw std::runtime_error("scene: aoi must be a single polygon for serialization");
  j["aoi"] = polygon2_to_json(s.aoi().pieces.front());
  json bs = json::array();
  for (const auto& b : s.buildings()) {
    json jb;
    jb["id"] = b.id;
    jb["footprint"] = polygon2_to_json(b.footprint);
    jb["base_z"] = b.base_z;
    jb["top_z"] = b.top_z;
    bs.push_back(std::move(jb));
  }
  j["buildings"] = std::move(bs);
  return j;
}

inline Scene scene_from_json(const json& j) {
  for (const char* key : {"ground_z", "receiver_height", "aoi", "buildings"})
    if (!j.contains(key))
      throw std::runtime_error(std::string("scene: missing field '") + key + "'");
  std::vector<Building> buildings;
  for (const auto& jb : j.at("buildings")) {
    for (const char* key : {"id", "footprint", "base_z", "top_z"})
      if (!jb.contains(key))
        throw std::runtime_error(std::string("building: missing field '") + key +
                                 "'");
    Building b;
    b.id = jb.at("id").get<int>();
    b.footprint = polygon2_from_json(jb.at("footprint"), "building footprint");
    b.base_z = jb.at("base_z").get<double>();
    b.top_z = jb.at("top_z").get<double>();
    buildings.push_back(std::move(b));
  }
  Polygon2 aoi = polygon2_from_json(j.at("aoi"), "scene aoi");
  if (aoi.signed_area() < 0) std::reverse(aoi.vertices.begin(), aoi.vertices.end());
  return Scene(std::move(buildings), j.at("ground_z").get<double>(),
               j.at("receiver_height").get<double>(), Region2{std::move(aoi)});
}

inline json epoch_to_json(const Epoch& e) {
  json j;
  json obs = json::array();
  for (const auto& o : e.observations()) {
    json jo;
    jo["sat_id"] = o.sat_id;
    jo["pos"] = vec3_to_json(o.position);
    jo["pseudorange"] = o.pseudorange;
    obs.push_back(std::move(jo));
  }
  j["observations"] = std::move(obs);
  if (e.truth()) {
    j["truth"] = {{"pos", vec3_to_json(e.truth()->position)},
                  {"clock_bias", e.truth()->clock_bias}};
  }
  return j;
}

inline Epoch epoch_from_json(const json& j) {
  if (!j.contains("observations"))
    throw std::runtime_error("epoch: missing field 'observations'");
  std::vector<SatelliteObservation> obs;
  for (const auto& jo : j.at("observations")) {
    for (const char* key : {"sat_id", "pos", "pseudorange"})
      if (!jo.contains(key))
        throw std::runtime_error(std::string("observation: missing field '") +
                                 key + "'");
    obs.push_back(SatelliteObservation{jo.at("sat_id").get<int>(),
                                       vec3_from_json(jo.at("pos"), "observation pos"),
                                       jo.at("pseudorange").get<double>()});
  }
  std::optional<TruthState> truth;
  if (j.contains("truth")) {
    truth = TruthState{vec3_from_json(j.at("truth").at("pos"), "truth pos"),
                       j.at("truth").at("clock_bias").get<double>()};
  }
  return Epoch(std::move(obs), truth);
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

inline void save_json_file(const std::string& path, const json& j) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out << j.dump(2) << "\n";
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

}  // namespace jsonio

inline Scene load_scene(const std::string& path) {
  return jsonio::scene_from_json(jsonio::load_json_file(path));
}

inline void save_scene(const std::string& path, const Scene& s) {
  jsonio::save_json_file(path, jsonio::scene_to_json(s));
}

inline Epoch load_epoch(const std::string& path) {
  return jsonio::epoch_from_json(jsonio::load_json_file(path));
}

inline void save_epoch(const std::string& path, const Epoch& e) {
  jsonio::save_json_file(path, jsonio::epoch_to_json(e));
}

}  // namespace modesel
