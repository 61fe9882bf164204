#pragma once

// JSON reading helpers shared by the description and scenario parsers.

#include <algorithm>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "dawnik/errors.hpp"
#include "dawnik/geometry.hpp"

namespace dawnik::detail {

using nlohmann::json;

inline int line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

inline json parse_json_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("syntax error: ") + e.what(), line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0), "");
  }
}

[[noreturn]] inline void schema_error(const std::string& what, const std::string& path) {
  throw ParseError(what, 0, path);
}

inline const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) schema_error("expected an object", path);
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(std::string("missing required field '") + key + "'", path);
  return *it;
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error("expected a number", path);
  return v.get<double>();
}

inline std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) schema_error("expected a string", path);
  return v.get<std::string>();
}

inline Eigen::Vector3d as_vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) schema_error("expected an array of 3 numbers", path);
  Eigen::Vector3d out;
  for (int i = 0; i < 3; ++i) out[i] = as_number(v[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]");
  return out;
}

inline Eigen::VectorXd as_vector(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error("expected an array of numbers", path);
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = as_number(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

inline Transform parse_pose(const json& obj, const std::string& path) {
  if (!obj.is_object()) schema_error("expected an object with xyz/rpy", path);
  Eigen::Vector3d xyz = Eigen::Vector3d::Zero();
  Eigen::Vector3d rpy = Eigen::Vector3d::Zero();
  if (obj.contains("xyz")) xyz = as_vec3(obj["xyz"], path + ".xyz");
  if (obj.contains("rpy")) rpy = as_vec3(obj["rpy"], path + ".rpy");
  return make_transform(xyz, rpy);
}

}  // namespace dawnik::detail
