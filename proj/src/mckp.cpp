#include "mvplan/mckp.hpp"

#include <cfenv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "mvplan/error.hpp"

namespace mvplan {

Cents to_cents(double usd) {
  if (!std::isfinite(usd)) throw std::invalid_argument("cost or budget is not finite");
  // nearbyint honours the current rounding mode; force ties-to-even.
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const double rounded = std::nearbyint(usd * 100.0);
  std::fesetround(saved);
  return static_cast<Cents>(rounded);
}

Cents plan_cents(double usd) {
  if (!std::isfinite(usd) || usd < 0.0) throw std::invalid_argument("plan cost must be finite and >= 0");
  // Products like 0.3 * 100 land a hair above the integer; do not bill
  // that as an extra cent.
  return static_cast<Cents>(std::ceil(usd * 100.0 - kCentSlack));
}

std::string_view to_string(MemberRole role) {
  switch (role) {
    case MemberRole::kSolo:
      return "solo";
    case MemberRole::kOwner:
      return "owner";
    case MemberRole::kConsumer:
      return "consumer";
  }
  return "solo";
}

std::vector<GroupPlan> enumerate_plans(const Segment& segment, const CostModel& cost_model,
                                       const QualityFactors& quality) {
  std::vector<GroupPlan> plans;
  plans.reserve(2);
  const double weight = normalized_saliency(segment.saliency_raw);
  for (Action a : {Action::kMid, Action::kHigh}) {
    GroupPlan p;
    p.group_id = segment.id;
    p.solo = true;
    p.shared_action = a;
    p.cost_usd = cost(a, segment.duration_s, cost_model);
    p.cost_cents = plan_cents(p.cost_usd);
    p.utility = quality.of(a) * weight * segment.duration_s;

    MemberAssignment m;
    m.segment_id = segment.id;
    m.role = MemberRole::kSolo;
    m.saliency_raw = segment.saliency_raw;
    m.unique_s = segment.duration_s;
    m.shared_action = a;
    m.suffix_action = a;
    m.action = a;
    m.cost_usd = p.cost_usd;
    m.utility = p.utility;
    p.members.push_back(std::move(m));
    plans.push_back(std::move(p));
  }
  return plans;
}

std::vector<GroupPlan> enumerate_plans(const SharingGroup& group, const CostModel& cost_model,
                                       const QualityFactors& quality,
                                       const EnumerationOptions& options) {
  const std::size_t n = group.member_segment_ids.size();
  if (n == 0) throw ValidationError("group '" + group.id + "' has no members");
  if (n > options.max_group_members) {
    throw ValidationError("group '" + group.id + "' has " + std::to_string(n) +
                          " members; enumerating 2*2^n plans exceeds the limit of " +
                          std::to_string(options.max_group_members) + " members");
  }
  if (group.unique_durations_s.size() != n || group.member_saliencies.size() != n) {
    throw ValidationError("group '" + group.id + "' has inconsistent per-member data");
  }

  const double ds = group.shared_duration_s;
  std::vector<double> weights(n);
  double weight_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    weights[j] = normalized_saliency(group.member_saliencies[j]);
    weight_sum += weights[j];
  }

  const std::uint32_t mask_count = std::uint32_t{1} << n;
  std::vector<GroupPlan> plans;
  plans.reserve(2 * static_cast<std::size_t>(mask_count));
  for (Action shared : {Action::kMid, Action::kHigh}) {
    const double shared_cost = cost(shared, ds, cost_model);
    for (std::uint32_t mask = 0; mask < mask_count; ++mask) {
      GroupPlan p;
      p.group_id = group.id;
      p.shared_action = shared;
      p.suffix_mask = mask;

      double c = shared_cost;
      double u = quality.of(shared) * weight_sum * ds;
      for (std::size_t j = 0; j < n; ++j) {
        const Action suffix = (mask >> j) & 1U ? Action::kHigh : Action::kMid;
        const double du = group.unique_durations_s[j];
        const double suffix_cost = cost(suffix, du, cost_model);
        const double suffix_utility = quality.of(suffix) * weights[j] * du;
        c += suffix_cost;
        u += suffix_utility;

        MemberAssignment m;
        m.segment_id = group.member_segment_ids[j];
        m.role = j == 0 ? MemberRole::kOwner : MemberRole::kConsumer;
        m.saliency_raw = group.member_saliencies[j];
        m.shared_s = ds;
        m.unique_s = du;
        m.shared_action = shared;
        m.suffix_action = suffix;
        if (ds > 0.0) {
          m.action = j == 0 ? shared : Action::kReuse;
        } else {
          m.action = suffix;
        }
        m.cost_usd = (j == 0 ? shared_cost : 0.0) + suffix_cost;
        m.utility = quality.of(shared) * weights[j] * ds + suffix_utility;
        p.members.push_back(std::move(m));
      }
      p.cost_usd = c;
      p.cost_cents = plan_cents(c);
      p.utility = u;
      plans.push_back(std::move(p));
    }
  }
  return plans;
}

PlanTable build_plan_table(const SongStructure& song, const CostModel& cost_model,
                           const QualityFactors& quality, const EnumerationOptions& options) {
  ValidationReport report = validate_song(song);
  if (!report.ok()) {
    const Violation& v = report.violations.front();
    throw ValidationError("song does not validate (" + std::to_string(report.violations.size()) +
                          " violations); first: " + v.code + " " + v.subject + ": " + v.message);
  }

  std::map<std::string, const SharingGroup*> group_of;
  for (const auto& g : song.groups) {
    for (const auto& member : g.member_segment_ids) group_of.emplace(member, &g);
  }

  PlanTable table;
  std::unordered_set<std::string> emitted;
  for (const auto& seg : song.segments) {
    auto it = group_of.find(seg.id);
    if (it == group_of.end()) {
      table.push_back(enumerate_plans(seg, cost_model, quality));
      continue;
    }
    const SharingGroup& g = *it->second;
    if (emitted.insert(g.id).second) {
      table.push_back(enumerate_plans(g, cost_model, quality, options));
    }
  }
  return table;
}

std::vector<MemberAssignment> AllocationResult::segments() const {
  std::vector<MemberAssignment> out;
  for (const auto& plan : selected) {
    out.insert(out.end(), plan.members.begin(), plan.members.end());
  }
  return out;
}

std::map<std::string, Action> AllocationResult::assignments() const {
  std::map<std::string, Action> out;
  for (const auto& plan : selected) {
    for (const auto& m : plan.members) out.emplace(m.segment_id, m.action);
  }
  return out;
}

namespace {

// Cheapest-plan feasibility: names the first unit that cannot be paid for
// even when every unit takes its cheapest plan.
void check_feasible(const PlanTable& plans, Cents budget_cents) {
  if (budget_cents < 0) {
    const bool named = !plans.empty() && !plans.front().empty();
    throw InfeasibleError(named ? plans.front().front().group_id : "", "budget is negative");
  }
  Cents running = 0;
  for (std::size_t g = 0; g < plans.size(); ++g) {
    if (plans[g].empty()) throw InfeasibleError("", "planning unit " + std::to_string(g) + " has no plans");
    Cents cheapest = std::numeric_limits<Cents>::max();
    for (const auto& p : plans[g]) cheapest = std::min(cheapest, p.cost_cents);
    running += cheapest;
    if (running > budget_cents) {
      const std::string& id = plans[g].front().group_id;
      throw InfeasibleError(id, "unit '" + id + "' cannot be afforded; cheapest selection needs " +
                                    std::to_string(running) + " cents through this unit but the budget is " +
                                    std::to_string(budget_cents) + " cents");
    }
  }
}

AllocationResult assemble_result(const PlanTable& plans, const std::vector<std::size_t>& picks,
                                 double budget_usd, Cents budget_cents, Cents b_star) {
  AllocationResult r;
  r.budget_usd = budget_usd;
  r.budget_cents = budget_cents;
  r.b_star = b_star;
  r.selected_index = picks;
  double utility = 0.0;
  for (std::size_t g = 0; g < plans.size(); ++g) {
    const GroupPlan& p = plans[g][picks[g]];
    r.selected.push_back(p);
    r.total_cost_cents += p.cost_cents;
    r.total_cost_usd += p.cost_usd;
    utility += p.utility;
  }
  r.total_utility = utility;
  return r;
}

}  // namespace

AllocationResult solve_dp(const PlanTable& plans, double budget_usd) {
  const Cents budget_cents = to_cents(budget_usd);
  check_feasible(plans, budget_cents);

  const std::size_t groups = plans.size();
  const std::size_t width = static_cast<std::size_t>(budget_cents) + 1;
  constexpr std::int32_t kNone = -1;

  // Unreachable cells are tracked by an explicit flag rather than -inf.
  std::vector<double> dp(width, 0.0);
  std::vector<char> reachable(width, 0);
  dp[0] = 0.0;
  reachable[0] = 1;

  std::vector<std::vector<std::int32_t>> choice(groups, std::vector<std::int32_t>(width, kNone));
  std::vector<std::vector<Cents>> prev(groups, std::vector<Cents>(width, kNone));

  // Plan indices of units [0, level) along the stored path ending at b.
  auto backtrack = [&](std::size_t level, Cents b) {
    std::vector<std::int32_t> path(level);
    for (std::size_t i = level; i-- > 0;) {
      path[i] = choice[i][static_cast<std::size_t>(b)];
      b = prev[i][static_cast<std::size_t>(b)];
    }
    return path;
  };

  std::vector<double> next(width);
  std::vector<char> next_reachable(width);
  for (std::size_t i = 0; i < groups; ++i) {
    std::fill(next_reachable.begin(), next_reachable.end(), 0);
    const auto& options = plans[i];
    for (std::size_t b = 0; b < width; ++b) {
      if (!reachable[b]) continue;
      for (std::size_t p = 0; p < options.size(); ++p) {
        const Cents c = options[p].cost_cents;
        if (c < 0 || static_cast<Cents>(b) + c > budget_cents) continue;
        const std::size_t nb = b + static_cast<std::size_t>(c);
        const double candidate = dp[b] + options[p].utility;
        bool take = false;
        if (!next_reachable[nb] || candidate > next[nb]) {
          take = true;
        } else if (candidate == next[nb]) {
          const Cents held_prev = prev[i][nb];
          if (held_prev == static_cast<Cents>(b)) {
            take = static_cast<std::int32_t>(p) < choice[i][nb];
          } else {
            auto mine = backtrack(i, static_cast<Cents>(b));
            auto held = backtrack(i, held_prev);
            mine.push_back(static_cast<std::int32_t>(p));
            held.push_back(choice[i][nb]);
            take = mine < held;
          }
        }
        if (take) {
          next[nb] = candidate;
          next_reachable[nb] = 1;
          choice[i][nb] = static_cast<std::int32_t>(p);
          prev[i][nb] = static_cast<Cents>(b);
        }
      }
    }
    dp.swap(next);
    reachable.swap(next_reachable);
  }

  Cents b_star = kNone;
  for (std::size_t b = 0; b < width; ++b) {
    if (!reachable[b]) continue;
    if (b_star == kNone || dp[b] > dp[static_cast<std::size_t>(b_star)]) b_star = static_cast<Cents>(b);
  }
  if (b_star == kNone) {
    // check_feasible guarantees a path; this only triggers on negative costs.
    throw InfeasibleError("", "no feasible selection");
  }

  const auto path = backtrack(groups, b_star);
  std::vector<std::size_t> picks(path.begin(), path.end());
  return assemble_result(plans, picks, budget_usd, budget_cents, b_star);
}

AllocationResult brute_force_solve(const PlanTable& plans, double budget_usd,
                                   std::uint64_t max_combinations) {
  std::uint64_t product = 1;
  for (const auto& options : plans) {
    if (options.empty()) throw InfeasibleError("", "planning unit without plans");
    if (product > max_combinations / options.size()) {
      throw std::length_error("brute force refused: plan product exceeds " +
                              std::to_string(max_combinations));
    }
    product *= options.size();
  }
  const Cents budget_cents = to_cents(budget_usd);
  check_feasible(plans, budget_cents);

  const std::size_t groups = plans.size();
  std::vector<std::size_t> odometer(groups, 0);
  std::vector<std::size_t> best;
  bool have_best = false;
  double best_utility = 0.0;
  Cents best_cents = 0;

  // Odometer with the last unit fastest enumerates selections in
  // lexicographic order, so the first optimum found is the lex-smallest.
  while (true) {
    Cents cents = 0;
    double utility = 0.0;
    for (std::size_t g = 0; g < groups; ++g) {
      const GroupPlan& p = plans[g][odometer[g]];
      cents += p.cost_cents;
      utility += p.utility;
    }
    if (cents <= budget_cents &&
        (!have_best || utility > best_utility || (utility == best_utility && cents < best_cents))) {
      have_best = true;
      best = odometer;
      best_utility = utility;
      best_cents = cents;
    }
    bool done = true;
    for (std::size_t g = groups; g-- > 0;) {
      if (++odometer[g] < plans[g].size()) {
        done = false;
        break;
      }
      odometer[g] = 0;
    }
    if (done) break;
  }

  if (!have_best) throw InfeasibleError("", "no feasible selection");
  return assemble_result(plans, best, budget_usd, budget_cents, best_cents);
}

std::vector<SweepEntry> budget_sweep(const PlanTable& plans, const std::vector<double>& budgets) {
  std::vector<SweepEntry> out;
  out.reserve(budgets.size());
  for (double budget : budgets) {
    SweepEntry entry;
    entry.budget_usd = budget;
    try {
      entry.result = solve_dp(plans, budget);
    } catch (const InfeasibleError& e) {
      entry.error = e.what();
      entry.infeasible_unit = e.group_id();
    }
    out.push_back(std::move(entry));
  }
  return out;
}

AllocationResult plan_song(const SongStructure& song, const CostModel& cost_model,
                           const QualityFactors& quality, double budget_usd,
                           const EnumerationOptions& options) {
  const PlanTable table = build_plan_table(song, cost_model, quality, options);
  return solve_dp(table, budget_usd - cost_model.fixed_overhead_usd);
}

}  // namespace mvplan
