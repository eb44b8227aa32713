#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "mgpmia/attack.hpp"
#include "mgpmia/graph.hpp"

namespace mgpmia {

// Membership labels keyed by node id: 1 member, 0 non-member.
using LabelMap = std::map<NodeId, int>;

struct MetricsReport {
  double acc = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  std::size_t n_members = 0;
  std::size_t n_nonmembers = 0;
  std::uint64_t seed = 0;
  std::string attack;
};

// Precision or recall with an empty denominator makes f1 = 0.
// Throws ConfigError when the key sets differ.
MetricsReport accuracy_f1(const LabelMap& predictions, const LabelMap& truth);

// Flattens split predictions into keyed maps. Member rows are keyed by
// member_ids[i], non-member rows by nonmember_ids[i].
struct KeyedOutcome {
  LabelMap predictions;
  LabelMap truth;
};
KeyedOutcome key_predictions(const SplitPredictions& predictions, std::span<const NodeId> member_ids,
                             std::span<const NodeId> nonmember_ids);

}  // namespace mgpmia
