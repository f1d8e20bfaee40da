#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sharp {

/// B-Rep face types (Track 2), in type-id order.
inline const std::vector<std::string>& face_type_vocabulary() {
  static const std::vector<std::string> v{"Plane", "Cylinder", "Cone", "Sphere", "Torus", "BSpline"};
  return v;
}

/// CAD operation types (Track 3), in type-id order.
inline const std::vector<std::string>& operation_type_vocabulary() {
  static const std::vector<std::string> v{"ExtrudeSide",    "ExtrudeEnd",    "RevolveSide", "Fillet",
                                          "Chamfer",        "CutExtrudeSide", "CutExtrudeEnd",
                                          "RevolveEnd",     "CutRevolveSide", "CutRevolveEnd",
                                          "Other"};
  return v;
}

/// Vocabulary for track 2 or 3.
inline const std::vector<std::string>& vocabulary_for_track(int track) {
  return track == 3 ? operation_type_vocabulary() : face_type_vocabulary();
}

namespace detail {

inline std::string fold_type_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (c == '-' || c == '_' || c == ' ' || c == '.') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace detail

/// Case-insensitive lookup; "B-Spline" and "BSpline" (and similar separator
/// variants) resolve to the same entry.
inline std::optional<int> find_type(const std::vector<std::string>& vocabulary, std::string_view name) {
  const std::string key = detail::fold_type_name(name);
  for (std::size_t i = 0; i < vocabulary.size(); ++i)
    if (detail::fold_type_name(vocabulary[i]) == key) return static_cast<int>(i);
  return std::nullopt;
}

/// Identity type grouping.
inline std::vector<int> identity_grouping(std::size_t n_types) {
  std::vector<int> g(n_types);
  for (std::size_t i = 0; i < n_types; ++i) g[i] = static_cast<int>(i);
  return g;
}

/// Merges Side/End sub-operations of the same operation into one type.
/// Each merged type is represented by the smallest member id, which keeps the
/// lowest-id tie-break meaningful after merging.
inline std::vector<int> operation_type_grouping() {
  const auto& v = operation_type_vocabulary();
  auto base = [](std::string name) {
    for (std::string_view suffix : {"Side", "End"}) {
      if (name.size() > suffix.size() && name.ends_with(suffix)) return name.substr(0, name.size() - suffix.size());
    }
    return name;
  };
  std::vector<int> g(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    g[i] = static_cast<int>(i);
    for (std::size_t j = 0; j < i; ++j) {
      if (base(v[j]) == base(v[i])) {
        g[i] = g[j];
        break;
      }
    }
  }
  return g;
}

/// Grouping map used by the consistency report for a track.
inline std::vector<int> grouping_for_track(int track) {
  return track == 3 ? operation_type_grouping() : identity_grouping(face_type_vocabulary().size());
}

}  // namespace sharp
