#include "mgpmia/metrics.hpp"

#include "mgpmia/errors.hpp"

namespace mgpmia {

MetricsReport accuracy_f1(const LabelMap& predictions, const LabelMap& truth) {
  if (predictions.size() != truth.size()) {
    throw ConfigError("accuracy_f1: " + std::to_string(predictions.size()) + " predictions for " +
                      std::to_string(truth.size()) + " labeled nodes");
  }
  MetricsReport r;
  auto p = predictions.begin();
  for (const auto& [node, actual] : truth) {
    if (p->first != node) throw ConfigError("accuracy_f1: no prediction for node " + std::to_string(node));
    const bool predicted = p->second != 0;
    if (actual != 0) {
      ++r.n_members;
      ++(predicted ? r.tp : r.fn);
    } else {
      ++r.n_nonmembers;
      ++(predicted ? r.fp : r.tn);
    }
    ++p;
  }
  const std::size_t total = r.tp + r.fp + r.tn + r.fn;
  r.acc = total == 0 ? 0.0 : static_cast<double>(r.tp + r.tn) / static_cast<double>(total);
  if (r.tp + r.fp > 0 && r.tp + r.fn > 0) {
    const double precision = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
    const double recall = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
    r.f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  }
  return r;
}

KeyedOutcome key_predictions(const SplitPredictions& predictions, std::span<const NodeId> member_ids,
                             std::span<const NodeId> nonmember_ids) {
  if (predictions.members.size() != member_ids.size() ||
      predictions.nonmembers.size() != nonmember_ids.size()) {
    throw ShapeError("key_predictions: prediction count does not match id list");
  }
  KeyedOutcome out;
  auto add = [&](const std::vector<Prediction>& rows, std::span<const NodeId> ids, int label) {
    for (const Prediction& p : rows) {
      const NodeId id = ids[p.node];
      if (!out.truth.emplace(id, label).second) {
        throw ConfigError("key_predictions: node " + std::to_string(id) + " appears twice");
      }
      out.predictions.emplace(id, p.label);
    }
  };
  add(predictions.members, member_ids, 1);
  add(predictions.nonmembers, nonmember_ids, 0);
  return out;
}

}  // namespace mgpmia
