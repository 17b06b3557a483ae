#pragma once

// Group-level multiple-choice knapsack allocation.
//
// Phase 1 enumerates the joint plans of every planning unit (a solo
// segment or a sharing group). Phase 2 selects exactly one plan per unit
// with an exact dynamic program over the budget in integer cents.
//
// Tie-breaking is fixed so results are reproducible and comparable with
// the brute-force oracle: higher utility wins, then lower total cents,
// then the lexicographically smallest sequence of plan indices.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvplan/core_model.hpp"

namespace mvplan {

inline constexpr const char* kSolverVersion = "mvplan-mckp/1.0";

using Cents = std::int64_t;

// Budgets: round-half-to-even onto integer cents (2.85 -> 285).
Cents to_cents(double usd);

inline constexpr double kCentSlack = 1e-9;

// Plan costs: rounded up to whole cents, so a selection that fits in
// B_c cents never spends more than B_c / 100 USD.
Cents plan_cents(double usd);

enum class MemberRole { kSolo, kOwner, kConsumer };
std::string_view to_string(MemberRole role);

// How one segment is realised under a plan. Cost is amortised so the
// shared prefix is charged to the owner only.
struct MemberAssignment {
  std::string segment_id;
  MemberRole role = MemberRole::kSolo;
  int saliency_raw = 1;
  double shared_s = 0.0;
  double unique_s = 0.0;
  Action shared_action = Action::kMid;
  Action suffix_action = Action::kMid;
  Action action = Action::kMid;  // summary tier recorded in the persistent state
  double cost_usd = 0.0;
  double utility = 0.0;

  bool operator==(const MemberAssignment&) const = default;
};

struct GroupPlan {
  std::string group_id;
  bool solo = false;
  Action shared_action = Action::kMid;
  std::uint32_t suffix_mask = 0;  // bit j set => member j's suffix is High
  double cost_usd = 0.0;
  Cents cost_cents = 0;
  double utility = 0.0;
  std::vector<MemberAssignment> members;

  bool operator==(const GroupPlan&) const = default;
};

using PlanTable = std::vector<std::vector<GroupPlan>>;

struct EnumerationOptions {
  std::size_t max_group_members = 10;
};

// Solo segment: exactly two plans, Mid then High.
std::vector<GroupPlan> enumerate_plans(const Segment& segment, const CostModel& cost_model,
                                       const QualityFactors& quality);

// Sharing group with n members: exactly 2 * 2^n plans, ordered by shared
// action (Mid, High) then suffix mask ascending. Throws ValidationError
// when n exceeds options.max_group_members.
std::vector<GroupPlan> enumerate_plans(const SharingGroup& group, const CostModel& cost_model,
                                       const QualityFactors& quality,
                                       const EnumerationOptions& options = {});

// One plan list per planning unit, in song order of each unit's first
// segment. Throws ValidationError if the song does not validate.
PlanTable build_plan_table(const SongStructure& song, const CostModel& cost_model,
                           const QualityFactors& quality, const EnumerationOptions& options = {});

struct AllocationResult {
  std::vector<GroupPlan> selected;          // exactly one per unit, unit order
  std::vector<std::size_t> selected_index;  // index into each unit's plan list
  double budget_usd = 0.0;
  Cents budget_cents = 0;
  Cents b_star = 0;  // DP cell holding the optimum
  Cents total_cost_cents = 0;
  double total_cost_usd = 0.0;
  double total_utility = 0.0;

  // Per-segment view in unit order.
  std::vector<MemberAssignment> segments() const;
  std::map<std::string, Action> assignments() const;

  bool operator==(const AllocationResult&) const = default;
};

// Exact DP. Throws InfeasibleError naming the first unit whose cheapest
// plan no longer fits once every earlier unit takes its cheapest plan.
AllocationResult solve_dp(const PlanTable& plans, double budget_usd);

// Exhaustive search over the Cartesian product, used as an oracle.
// Refuses (std::length_error) when the product exceeds max_combinations.
AllocationResult brute_force_solve(const PlanTable& plans, double budget_usd,
                                   std::uint64_t max_combinations = 10'000'000);

struct SweepEntry {
  double budget_usd = 0.0;
  std::optional<AllocationResult> result;
  std::string error;            // set when result is empty
  std::string infeasible_unit;  // unit named by the infeasibility error
};

std::vector<SweepEntry> budget_sweep(const PlanTable& plans, const std::vector<double>& budgets);

// Planning entry point: builds the plan table, reserves the fixed
// overhead from the budget and solves.
AllocationResult plan_song(const SongStructure& song, const CostModel& cost_model,
                           const QualityFactors& quality, double budget_usd,
                           const EnumerationOptions& options = {});

}  // namespace mvplan
