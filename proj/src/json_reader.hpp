#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "qpms/error.hpp"

namespace qpms::detail {

using json = nlohmann::json;

inline std::string join_path(const std::string& base, const std::string& key) { return base + "/" + key; }

template <class T>
T convert(const json& value, const std::string& path) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!value.is_boolean()) throw ValidationError(path, "expected a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!value.is_number_integer()) throw ValidationError(path, "expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (value.is_number_integer() && !value.is_number_unsigned() && value.get<long long>() < 0) {
        throw ValidationError(path, "expected a non-negative integer");
      }
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!value.is_number()) throw ValidationError(path, "expected a number");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!value.is_string()) throw ValidationError(path, "expected a string");
  }
  return value.get<T>();
}

/// Reads keys of one JSON object and rejects any key it was not asked about.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw ValidationError(path_.empty() ? "/" : path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return object_.contains(key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!object_.contains(key)) throw ValidationError(child(key), "required field missing");
    return object_.at(key);
  }

  template <class T>
  T required(const std::string& key) {
    return convert<T>(raw(key), child(key));
  }

  template <class T>
  T optional(const std::string& key, T fallback) {
    return has(key) ? convert<T>(object_.at(key), child(key)) : fallback;
  }

  std::string child(const std::string& key) const { return join_path(path_, key); }
  const std::string& path() const { return path_; }

  void finish() const {
    for (const auto& [key, value] : object_.items()) {
      if (!seen_.count(key)) throw ValidationError(join_path(path_, key), "unknown field");
    }
  }

 private:
  const json& object_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace qpms::detail
