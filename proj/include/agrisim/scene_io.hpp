#pragma once

#include "agrisim/scene.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// JSON scene files:
// {"ground_z": 0.0 | null,
//  "bounds": {"min": [x, y, z], "max": [x, y, z]},
//  "classes": [{"id": 1, "name": "ground", "color": [r, g, b]}, ...],
//  "objects": [{"shape": "sphere", "center": [x, y, z], "dims": [...], "class": "canopy"}, ...]}

namespace agrisim {

namespace detail {

inline Vec3 json_vec3(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw SceneError(where + ": expected an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) throw SceneError(where + ": expected an array of 3 numbers");
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

inline nlohmann::json vec3_json(const Vec3& v) {
  return nlohmann::json::array({v.x(), v.y(), v.z()});
}

inline std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t line_start = 0;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      line_start = i + 1;
    }
  }
  std::size_t line_end = text.find('\n', line_start);
  if (line_end == std::string::npos) line_end = text.size();
  return "line " + std::to_string(line) + ": " + text.substr(line_start, line_end - line_start);
}

}  // namespace detail

inline Scene scene_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SceneError("scene: top level must be an object");
  try {
    std::optional<double> ground;
    if (j.contains("ground_z") && !j.at("ground_z").is_null()) ground = j.at("ground_z").get<double>();

    if (!j.contains("bounds")) throw SceneError("scene: missing 'bounds'");
    const Aabb bounds{detail::json_vec3(j.at("bounds").at("min"), "bounds.min"),
                      detail::json_vec3(j.at("bounds").at("max"), "bounds.max")};

    std::vector<SemanticClass> classes;
    for (std::size_t i = 0; i < j.value("classes", nlohmann::json::array()).size(); ++i) {
      const auto& c = j.at("classes")[i];
      SemanticClass sc;
      sc.id = c.at("id").get<ClassId>();
      sc.name = c.at("name").get<std::string>();
      const auto& col = c.at("color");
      if (!col.is_array() || col.size() != 3) {
        throw SceneError("classes[" + std::to_string(i) + "]: color must be [r, g, b]");
      }
      for (std::size_t k = 0; k < 3; ++k) sc.color[k] = col[k].get<std::uint8_t>();
      classes.push_back(std::move(sc));
    }

    std::vector<SceneObject> objects;
    const auto objs = j.value("objects", nlohmann::json::array());
    for (std::size_t i = 0; i < objs.size(); ++i) {
      const auto& o = objs[i];
      const std::string where = "objects[" + std::to_string(i) + "]";
      const auto shape_str = o.at("shape").get<std::string>();
      const auto shape = shape_from_name(shape_str);
      if (!shape) throw SceneError(where + ": unknown shape '" + shape_str + "'");
      SceneObject so;
      so.shape = *shape;
      so.center = detail::json_vec3(o.at("center"), where + ".center");
      so.dims = o.at("dims").get<std::vector<double>>();
      so.class_name = o.at("class").get<std::string>();
      ClassId id = 0;
      for (const auto& c : classes) {
        if (c.name == so.class_name) id = c.id;
      }
      if (id == 0) throw SceneError(where + ": unknown class '" + so.class_name + "'");
      so.class_id = id;
      objects.push_back(std::move(so));
    }
    return Scene(std::move(classes), std::move(objects), ground, bounds);
  } catch (const nlohmann::json::exception& e) {
    throw SceneError(std::string("scene: ") + e.what());
  }
}

inline nlohmann::json scene_to_json(const Scene& s) {
  nlohmann::json j;
  j["ground_z"] = s.ground_z() ? nlohmann::json(*s.ground_z()) : nlohmann::json(nullptr);
  j["bounds"] = {{"min", detail::vec3_json(s.bounds().min)}, {"max", detail::vec3_json(s.bounds().max)}};
  j["classes"] = nlohmann::json::array();
  for (const auto& c : s.classes()) {
    j["classes"].push_back({{"id", c.id}, {"name", c.name}, {"color", {c.color[0], c.color[1], c.color[2]}}});
  }
  j["objects"] = nlohmann::json::array();
  for (const auto& o : s.objects()) {
    j["objects"].push_back({{"shape", std::string(shape_name(o.shape))},
                            {"center", detail::vec3_json(o.center)},
                            {"dims", o.dims},
                            {"class", o.class_name}});
  }
  return j;
}

inline std::string serialize_scene(const Scene& s) {
  return scene_to_json(s).dump(1);
}

inline Scene parse_scene(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SceneError("scene parse error at " + detail::line_context(text, e.byte == 0 ? 0 : e.byte - 1) + " (" +
                     e.what() + ")");
  }
  return scene_from_json(j);
}

inline Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SceneError("cannot open scene file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str());
}

inline void save_scene(const Scene& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw SceneError("cannot write scene file " + path.string());
  out << serialize_scene(s) << '\n';
}

}  // namespace agrisim
