#pragma once

// Strict JSON config access. Every key must be consumed; leftovers are
// reported as unknown with their JSON path.

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seed6d/errors.hpp"
#include "seed6d/se3.hpp"
#include "seed6d/stiffness.hpp"

namespace seed6d {

using Json = nlohmann::json;

inline Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

class ConfigNode {
 public:
  ConfigNode(const Json& j, std::string path, std::string source = "config")
      : j_(j), path_(std::move(path)), source_(std::move(source)) {
    if (!j_.is_object()) fail("expected an object");
  }

  const std::string& path() const { return path_; }

  bool has(const std::string& key) const { return j_.contains(key); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(source_ + ": at " + (path_.empty() ? "/" : path_) + ": " + msg);
  }
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(source_ + ": at " + path_ + "/" + key + ": " + msg);
  }

  double number(const std::string& key) {
    const Json& v = take(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  std::uint64_t unsigned_integer(const std::string& key) {
    const Json& v = take(key);
    if (!v.is_number_unsigned()) fail(key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    return has(key) ? unsigned_integer(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = take(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const Json& v = take(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  Vec3 vec3(const std::string& key) {
    const Json& v = take(key);
    return to_vec3(v, path_ + "/" + key);
  }
  Vec3 vec3(const std::string& key, const Vec3& fallback) {
    return has(key) ? vec3(key) : fallback;
  }

  std::vector<Vec3> vec3_list(const std::string& key) {
    const Json& v = take(key);
    if (!v.is_array()) fail(key, "expected an array of 3-vectors");
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(to_vec3(v[i], path_ + "/" + key + "/" + std::to_string(i)));
    }
    return out;
  }

  std::vector<double> number_list(const std::string& key) {
    const Json& v = take(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const Json& e : v) {
      if (!e.is_number()) fail(key, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  /// Consumes `key` if present and null; true in that case or when absent.
  bool take_null(const std::string& key) {
    if (!has(key)) return true;
    if (!j_.at(key).is_null()) return false;
    consumed_.insert(key);
    return true;
  }

  std::vector<int> int_list(const std::string& key) {
    const Json& v = take(key);
    if (!v.is_array()) fail(key, "expected an array of integers");
    std::vector<int> out;
    for (const Json& e : v) {
      if (!e.is_number_integer()) fail(key, "expected an array of integers");
      out.push_back(e.get<int>());
    }
    return out;
  }

  ConfigNode object(const std::string& key) { return {take(key), path_ + "/" + key, source_}; }

  std::vector<ConfigNode> object_list(const std::string& key) {
    const Json& v = take(key);
    if (!v.is_array()) fail(key, "expected an array of objects");
    std::vector<ConfigNode> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.emplace_back(v[i], path_ + "/" + key + "/" + std::to_string(i), source_);
    }
    return out;
  }

  /// Rejects keys that were never read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!consumed_.count(it.key())) fail(it.key(), "unknown key");
    }
  }

 private:
  const Json& take(const std::string& key) {
    if (!j_.contains(key)) fail(key, "missing required key");
    consumed_.insert(key);
    return j_.at(key);
  }

  Vec3 to_vec3(const Json& v, const std::string& where) const {
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
        !v[2].is_number()) {
      throw ConfigError(source_ + ": at " + where + ": expected an array of 3 numbers");
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }

  const Json& j_;
  std::string path_;
  std::string source_;
  std::set<std::string> consumed_;
};

inline StiffnessParams parse_stiffness(ConfigNode node) {
  StiffnessParams k(node.vec3("k_tau"), node.vec3("k_f"));
  node.finish();
  try {
    k.validate();
  } catch (const ConfigError& e) {
    node.fail(e.what());
  }
  return k;
}

inline Json stiffness_to_json(const StiffnessParams& k) {
  return {{"k_tau", {k.k_tau.x(), k.k_tau.y(), k.k_tau.z()}},
          {"k_f", {k.k_f.x(), k.k_f.y(), k.k_f.z()}}};
}

inline double degrees(double deg) { return deg * M_PI / 180.0; }

}  // namespace seed6d
