#include "mvplan/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "mvplan/error.hpp"

namespace mvplan {

std::string_view to_string(QualityScale scale) {
  return scale == QualityScale::kJudge1To5 ? "judge_1_5" : "normalized_0_1";
}

SegmentQuality make_quality(std::string segment_id, double value, QualityScale scale) {
  const double lo = scale == QualityScale::kJudge1To5 ? 1.0 : 0.0;
  const double hi = scale == QualityScale::kJudge1To5 ? 5.0 : 1.0;
  if (!(value >= lo && value <= hi)) {
    throw std::invalid_argument("quality " + std::to_string(value) + " for segment '" + segment_id +
                                "' is outside the " + std::string(to_string(scale)) + " scale");
  }
  return SegmentQuality{std::move(segment_id), value, scale};
}

double CostLedger::total() const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.cost_usd;
  return sum;
}

CostLedger CostLedger::scaled(double factor) const {
  CostLedger out = *this;
  for (auto& e : out.entries) e.cost_usd *= factor;
  return out;
}

CostLedger ledger_from_allocation(const AllocationResult& result) {
  CostLedger ledger;
  for (const auto& m : result.segments()) ledger.entries.push_back({m.segment_id, m.cost_usd});
  return ledger;
}

double compute_cqr(std::span<const int> saliencies_raw, std::span<const SegmentQuality> qualities,
                   const CostLedger& ledger) {
  if (saliencies_raw.size() != qualities.size() || qualities.size() != ledger.entries.size()) {
    throw std::invalid_argument("compute_cqr: saliency, quality and ledger lengths differ");
  }
  double numerator = 0.0;
  for (std::size_t i = 0; i < qualities.size(); ++i) {
    if (qualities[i].scale != QualityScale::kJudge1To5) {
      throw std::invalid_argument("compute_cqr: quality for '" + qualities[i].segment_id +
                                  "' is not on the judge 1-5 scale");
    }
    numerator += normalized_saliency(saliencies_raw[i]) * qualities[i].value;
  }
  const double denominator = ledger.total();
  if (denominator == 0.0) throw DegenerateError("compute_cqr: total cost is zero (division by zero)");
  return numerator / denominator;
}

UtilityReport utility_report(const AllocationResult& result, const QualityFactors& quality) {
  UtilityReport report;
  for (const auto& m : result.segments()) {
    UtilityEntry e;
    e.segment_id = m.segment_id;
    e.saliency_raw = m.saliency_raw;
    e.shared_s = m.shared_s;
    e.unique_s = m.unique_s;
    e.shared_action = m.shared_action;
    e.suffix_action = m.suffix_action;
    const double w = normalized_saliency(m.saliency_raw);
    e.contribution = quality.of(m.shared_action) * w * m.shared_s + quality.of(m.suffix_action) * w * m.unique_s;
    report.total += e.contribution;
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace mvplan
