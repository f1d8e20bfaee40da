#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sharp {

/// Per-point membership (face id or step id) plus a categorical type id.
///
/// Membership ids are kept as supplied; they need not be contiguous. Each
/// type id indexes `vocabulary`.
struct LabelTable {
  std::vector<std::int64_t> membership;
  std::vector<int> type_id;
  std::vector<std::string> vocabulary;

  std::size_t size() const { return membership.size(); }
};

}  // namespace sharp
