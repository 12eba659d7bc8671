#include "lsflow/types.hpp"

#include <unordered_set>

namespace lsflow {

void CorrespondenceSet::validate(std::size_t n0, std::size_t n1) const {
  std::unordered_set<int> seen;
  seen.reserve(pairs.size());
  for (const Correspondence& c : pairs) {
    if (c.i < 0 || static_cast<std::size_t>(c.i) >= n0)
      throw DimensionError("correspondence: source index " + std::to_string(c.i) +
                           " out of range");
    if (c.j < 0 || static_cast<std::size_t>(c.j) >= n1)
      throw DimensionError("correspondence: target index " + std::to_string(c.j) +
                           " out of range");
    if (!seen.insert(c.i).second)
      throw DimensionError("correspondence: duplicate source index " +
                           std::to_string(c.i));
  }
}

}  // namespace lsflow
