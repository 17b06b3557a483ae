#pragma once

// Cost accounting and the Cost-Quality Ratio:
//
//   CQR = sum_i (m_i / 5) * Q_i / sum_i C(o_i*)
//
// with m_i the raw 1..5 saliency, Q_i the judge score on [1, 5] and
// C(o_i*) the amortised per-segment cost. The shared prefix of a sharing
// group is charged to its owner only, matching the solver's costing.

#include <span>
#include <string>
#include <vector>

#include "mvplan/core_model.hpp"
#include "mvplan/mckp.hpp"

namespace mvplan {

enum class QualityScale { kJudge1To5, kNormalized01 };
std::string_view to_string(QualityScale scale);

struct SegmentQuality {
  std::string segment_id;
  double value = 0.0;
  QualityScale scale = QualityScale::kJudge1To5;

  bool operator==(const SegmentQuality&) const = default;
};

// Throws std::invalid_argument when value lies outside its scale.
SegmentQuality make_quality(std::string segment_id, double value, QualityScale scale);

struct LedgerEntry {
  std::string segment_id;
  double cost_usd = 0.0;

  bool operator==(const LedgerEntry&) const = default;
};

struct CostLedger {
  std::vector<LedgerEntry> entries;

  double total() const;
  CostLedger scaled(double factor) const;
  bool operator==(const CostLedger&) const = default;
};

CostLedger ledger_from_allocation(const AllocationResult& result);

// Entries are matched by position: saliencies_raw[i], qualities[i] and
// ledger.entries[i] describe the same segment. Throws DegenerateError on
// zero total cost and std::invalid_argument on length or scale mismatch.
double compute_cqr(std::span<const int> saliencies_raw, std::span<const SegmentQuality> qualities,
                   const CostLedger& ledger);

struct UtilityEntry {
  std::string segment_id;
  int saliency_raw = 1;
  double shared_s = 0.0;
  double unique_s = 0.0;
  Action shared_action = Action::kMid;
  Action suffix_action = Action::kMid;
  double contribution = 0.0;
};

struct UtilityReport {
  std::vector<UtilityEntry> entries;
  double total = 0.0;
};

// Recomputes every segment's saliency-weighted utility from its tiers.
UtilityReport utility_report(const AllocationResult& result, const QualityFactors& quality);

}  // namespace mvplan
