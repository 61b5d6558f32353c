// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#include "enumeration/exact_enum.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <string>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/parallel.hpp"

namespace blt::enumeration {

void EnumConfig::validate() const {
  lattice::EventParams{L0, 0}.validate();
  if (n_max < 1) throw InvalidArgument("n_max must be >= 1");
  if (max_len < n_max) throw InvalidArgument("max_len must be >= n_max");
  if (max_len > 4096) throw InvalidArgument("max_len must be <= 4096");
  if (max_depth < 0) throw InvalidArgument("max_depth must be >= 0");
  if (node_budget == 0) throw InvalidArgument("node_budget must be positive");
}

namespace {

void check_budget(std::uint64_t nodes, std::uint64_t budget) {
  if (nodes > budget) {
    throw ResourceError("enumeration exceeded the node budget of " + std::to_string(budget) + " expansions");
  }
}

/// Sum of counts[m] / 2^m.
DyadicProb mass_by_length(const std::vector<std::uint64_t>& counts) {
  DyadicProb total;
  for (std::size_t m = 0; m < counts.size(); ++m) {
    if (counts[m] != 0) total += DyadicProb::from_count(counts[m], static_cast<std::uint32_t>(m));
  }
  return total;
}

// Walks confined to (0, n) until the first hit of n. Sites 1..n-1 carry a
// visit counter. In B_n^+, a level k in (0, n) is a split point exactly when
// it is visited once, so a path is irreducible iff every interior site is
// visited at least twice (n >= 2).
class PlusSearch {
 public:
  PlusSearch(int n, int L0, std::uint64_t budget, bool reverse,
             const std::function<void(const std::vector<lattice::Step>&)>* visit)
      : n_(n), L0_(L0), budget_(budget), reverse_(reverse), visit_(visit),
        counts_(static_cast<std::size_t>(n) + 1, 0),
        b_plus_(lattice::max_b_plus_length(n, L0) + 1, 0),
        irreducible_(lattice::max_b_plus_length(n, L0) + 1, 0) {}

  void run() {
    // The first step must be +1.
    push(1);
    if (n_ == 1) {
      record(1);
    } else {
      ++counts_[1];
      descend(1, 1);
    }
  }

  PlusEnumeration result() const {
    PlusEnumeration out;
    out.n = n_;
    out.b_plus = mass_by_length(b_plus_);
    out.irreducible = mass_by_length(irreducible_);
    for (auto c : b_plus_) out.b_plus_paths += c;
    for (auto c : irreducible_) out.irreducible_paths += c;
    out.nodes = nodes_;
    return out;
  }

 private:
  void push(int step) {
    if (visit_ != nullptr) steps_.push_back(static_cast<lattice::Step>(step));
  }
  void pop() {
    if (visit_ != nullptr) steps_.pop_back();
  }

  void record(std::size_t length) {
    ++b_plus_[length];
    bool irreducible = true;
    if (n_ >= 2) {
      for (int x = 1; x < n_; ++x) {
        if (counts_[static_cast<std::size_t>(x)] < 2) {
          irreducible = false;
          break;
        }
      }
    }
    if (irreducible) ++irreducible_[length];
    if (visit_ != nullptr) (*visit_)(steps_);
  }

  void descend(int pos, std::size_t t) {
    check_budget(++nodes_, budget_);
    const int first = reverse_ ? -1 : 1;
    for (int step : {first, -first}) {
      const int next = pos + step;
      if (next <= 0) continue;
      push(step);
      if (next == n_) {
        record(t + 1);
      } else {
        auto& c = counts_[static_cast<std::size_t>(next)];
        if (c < L0_) {
          ++c;
          descend(next, t + 1);
          --c;
        }
      }
      pop();
    }
  }

  int n_;
  int L0_;
  std::uint64_t budget_;
  bool reverse_;
  const std::function<void(const std::vector<lattice::Step>&)>* visit_;
  std::vector<int> counts_;
  std::vector<std::uint64_t> b_plus_;
  std::vector<std::uint64_t> irreducible_;
  std::vector<lattice::Step> steps_;
  std::uint64_t nodes_ = 0;
};

}  // namespace

PlusEnumeration enumerate_b_plus(int n, int L0, std::uint64_t node_budget, bool reverse_order) {
  lattice::EventParams{L0, n}.validate();
  if (n == 0) {
    PlusEnumeration out;
    out.b_plus = DyadicProb::one();
    out.b_plus_paths = 1;
    return out;
  }
  PlusSearch search(n, L0, node_budget, reverse_order, nullptr);
  search.run();
  return search.result();
}

DyadicProb prob_B_plus(int n, int L0, std::uint64_t node_budget) {
  return enumerate_b_plus(n, L0, node_budget).b_plus;
}

DyadicProb prob_L(int n, int L0, std::uint64_t node_budget) {
  if (n < 1) throw InvalidArgument("prob_L requires n >= 1");
  return enumerate_b_plus(n, L0, node_budget).irreducible;
}

void for_each_b_plus_path(int n, int L0, const std::function<void(const LatticePath&)>& visit) {
  lattice::EventParams{L0, n}.validate();
  if (n == 0) {
    visit(LatticePath{});
    return;
  }
  const std::function<void(const std::vector<lattice::Step>&)> adapter =
      [&](const std::vector<lattice::Step>& steps) { visit(LatticePath(steps)); };
  PlusSearch search(n, L0, kDefaultNodeBudget, false, &adapter);
  search.run();
}

// ---------------------------------------------------------------------------
// B_n bracketing
// ---------------------------------------------------------------------------

namespace {

struct BState {
  std::vector<int> counts;  // indexed by site + offset
  int pos = 0;
  int t = 0;
  int running_max = 0;
};

struct BTally {
  // hits[k][t]: walks first reaching level k at time t with no violation
  std::vector<std::vector<std::uint64_t>> hits;
  // frontier[M]: surviving walks of length max_len whose maximum is M < n_max
  std::vector<std::uint64_t> frontier;
  // pruned[M][t]: prefixes of length t dropped for going below -max_depth
  std::vector<std::vector<std::uint64_t>> pruned;
  std::uint64_t nodes = 0;

  BTally(int n_max, int max_len)
      : hits(static_cast<std::size_t>(n_max) + 1, std::vector<std::uint64_t>(static_cast<std::size_t>(max_len) + 1, 0)),
        frontier(static_cast<std::size_t>(n_max) + 1, 0),
        pruned(static_cast<std::size_t>(n_max) + 1, std::vector<std::uint64_t>(static_cast<std::size_t>(max_len) + 1, 0)) {}

  void merge(const BTally& other) {
    for (std::size_t k = 0; k < hits.size(); ++k) {
      for (std::size_t t = 0; t < hits[k].size(); ++t) {
        hits[k][t] += other.hits[k][t];
        pruned[k][t] += other.pruned[k][t];
      }
      frontier[k] += other.frontier[k];
    }
    nodes += other.nodes;
  }
};

class BSearch {
 public:
  BSearch(const EnumConfig& config, std::atomic<std::uint64_t>& shared_nodes)
      : cfg_(config), offset_(config.max_depth), shared_nodes_(shared_nodes) {}

  BState initial_state() const {
    BState s;
    s.counts.assign(static_cast<std::size_t>(cfg_.max_depth + cfg_.n_max + 1), 0);
    return s;
  }

  /// Explores from `state`; when split_depth >= 0, stops at that depth and
  /// stores the frontier states in `tasks` instead of descending further.
  void run(BState& state, BTally& tally, int split_depth, std::vector<BState>* tasks) {
    tally_ = &tally;
    split_depth_ = split_depth;
    tasks_ = tasks;
    descend(state);
  }

 private:
  void descend(BState& s) {
    ++tally_->nodes;
    check_budget(shared_nodes_.fetch_add(1, std::memory_order_relaxed) + 1, cfg_.node_budget);
    if (s.t == cfg_.max_len) {
      ++tally_->frontier[static_cast<std::size_t>(s.running_max)];
      return;
    }
    if (tasks_ != nullptr && s.t == split_depth_) {
      tasks_->push_back(s);
      --tally_->nodes;  // the task will count this node again
      return;
    }
    const int first = cfg_.reverse_order ? -1 : 1;
    for (int step : {first, -first}) {
      const int next = s.pos + step;
      const auto next_t = static_cast<std::size_t>(s.t + 1);
      if (next < -cfg_.max_depth) {
        ++tally_->pruned[static_cast<std::size_t>(s.running_max)][next_t];
        continue;
      }
      auto& c = s.counts[static_cast<std::size_t>(next + offset_)];
      if (c >= cfg_.L0) continue;
      if (next > s.running_max) {
        ++tally_->hits[static_cast<std::size_t>(next)][next_t];
        if (next == cfg_.n_max) continue;
      }
      ++c;
      const int saved_pos = s.pos;
      const int saved_max = s.running_max;
      s.pos = next;
      s.running_max = std::max(s.running_max, next);
      ++s.t;
      descend(s);
      --s.t;
      s.pos = saved_pos;
      s.running_max = saved_max;
      --c;
    }
  }

  const EnumConfig& cfg_;
  int offset_;
  std::atomic<std::uint64_t>& shared_nodes_;
  BTally* tally_ = nullptr;
  int split_depth_ = -1;
  std::vector<BState>* tasks_ = nullptr;
};

}  // namespace

DyadicProb geometric_tail_bound(int L0, int horizon) {
  if (L0 < 1 || horizon < 0) throw InvalidArgument("geometric_tail_bound: bad arguments");
  const auto window = static_cast<std::uint32_t>(2 * L0 + 2);
  const auto windows = static_cast<std::uint32_t>(horizon) / window;
  const BigInt base = (BigInt(1) << window) - 1;
  return DyadicProb(BigInt(boost::multiprecision::pow(base, windows)), window * windows);
}

BTable enumerate_B(const EnumConfig& config) {
  config.validate();
  std::atomic<std::uint64_t> shared_nodes{0};
  BSearch search(config, shared_nodes);
  BTally total(config.n_max, config.max_len);

  const unsigned threads = resolve_threads(config.threads);
  if (threads <= 1) {
    BState root = search.initial_state();
    search.run(root, total, -1, nullptr);
  } else {
    const int split = std::min(config.max_len, 8);
    std::vector<BState> tasks;
    BState root = search.initial_state();
    search.run(root, total, split, &tasks);
    std::vector<BTally> partial(tasks.size(), BTally(config.n_max, config.max_len));
    parallel_for(tasks.size(), threads, [&](std::size_t i) {
      BSearch worker(config, shared_nodes);
      worker.run(tasks[i], partial[i], -1, nullptr);
    });
    for (const auto& p : partial) total.merge(p);
  }

  BTable table;
  table.config = config;
  table.nodes = total.nodes;
  table.rows.resize(static_cast<std::size_t>(config.n_max) + 1);
  table.rows[0].n = 0;
  table.rows[0].interval = {DyadicProb::one(), DyadicProb::one()};

  // Cut-off mass by running maximum; a cut-off prefix with maximum M can
  // still extend to a B_n path for every n > M.
  std::vector<DyadicProb> cut_by_max(static_cast<std::size_t>(config.n_max) + 1);
  for (int m = 0; m <= config.n_max; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    DyadicProb cut = DyadicProb::from_count(total.frontier[mi], static_cast<std::uint32_t>(config.max_len));
    cut += mass_by_length(total.pruned[mi]);
    cut_by_max[mi] = cut;
  }

  DyadicProb cumulative_cut;
  for (int n = 1; n <= config.n_max; ++n) {
    const auto ni = static_cast<std::size_t>(n);
    cumulative_cut += cut_by_max[ni - 1];
    BBracket& row = table.rows[ni];
    row.n = n;
    const DyadicProb lower = mass_by_length(total.hits[ni]);
    row.tail_frontier = cumulative_cut;
    row.tail_horizon = std::min(config.max_len, 2 * (config.max_depth + 1) + n - 1);
    row.tail_geometric = geometric_tail_bound(config.L0, row.tail_horizon);
    DyadicProb upper = lower + std::min(row.tail_frontier, row.tail_geometric);
    if (upper > DyadicProb::one()) upper = DyadicProb::one();
    row.interval = {lower, upper};
  }
  return table;
}

ProbInterval prob_B(int n, const EnumConfig& config) {
  if (n < 0) throw InvalidArgument("prob_B requires n >= 0");
  if (n == 0) return {DyadicProb::one(), DyadicProb::one()};
  EnumConfig cfg = config;
  cfg.n_max = n;
  cfg.max_len = std::max(cfg.max_len, n);
  return enumerate_B(cfg).rows[static_cast<std::size_t>(n)].interval;
}

// ---------------------------------------------------------------------------
// Renewal identity, C4, constants
// ---------------------------------------------------------------------------

bool RenewalReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const RenewalRow& r) { return r.pass; });
}

RenewalReport renewal_check(std::span<const DyadicProb> b_plus, std::span<const DyadicProb> irreducible, int L0) {
  if (b_plus.size() != irreducible.size() || b_plus.empty()) {
    throw InvalidArgument("renewal_check: tables must have equal nonzero size");
  }
  RenewalReport report;
  report.L0 = L0;
  for (std::size_t n = 1; n < b_plus.size(); ++n) {
    DyadicProb rhs;
    for (std::size_t j = 1; j <= n; ++j) rhs += irreducible[j] * b_plus[n - j];
    report.rows.push_back({static_cast<int>(n), b_plus[n], rhs, b_plus[n] == rhs});
  }
  return report;
}

RenewalReport renewal_check(int n_max, int L0) {
  if (n_max < 1) throw InvalidArgument("renewal_check requires n_max >= 1");
  std::vector<DyadicProb> b_plus{DyadicProb::one()};
  std::vector<DyadicProb> irreducible{DyadicProb::zero()};
  for (int n = 1; n <= n_max; ++n) {
    const auto e = enumerate_b_plus(n, L0);
    b_plus.push_back(e.b_plus);
    irreducible.push_back(e.irreducible);
  }
  return renewal_check(b_plus, irreducible, L0);
}

// Floating point from here on.
double truncated_root(std::span<const DyadicProb> prob_L) {
  std::vector<double> p(prob_L.size(), 0.0);
  for (std::size_t n = 1; n < prob_L.size(); ++n) p[n] = prob_L[n].to_double();
  const auto excess = [&](double c) {
    double sum = 0.0;
    for (std::size_t n = 1; n < p.size(); ++n) sum += std::exp(c * static_cast<double>(n)) * p[n];
    return sum - 1.0;
  };
  double lo = 1e-9;
  double hi = std::numbers::ln2;
  if (excess(lo) >= 0.0) throw ConvergenceError("truncated renewal sum already >= 1 at c = 1e-9: no root in (0, log 2]");
  if (excess(hi) < 0.0) throw ConvergenceError("truncated renewal sum < 1 at c = log 2: no root in (0, log 2]");
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

C4Estimate estimate_C4(std::span<const DyadicProb> prob_L, int L0) {
  if (prob_L.size() < 2) throw InvalidArgument("estimate_C4 needs P(L_n) for n >= 1");
  C4Estimate est;
  est.L0 = L0;
  est.n_max = static_cast<int>(prob_L.size()) - 1;
  const int start = (est.n_max + 1) / 2;
  for (int N = start; N <= est.n_max; ++N) {
    est.roots.emplace_back(N, truncated_root(prob_L.first(static_cast<std::size_t>(N) + 1)));
  }
  for (std::size_t i = 1; i < est.roots.size(); ++i) {
    // bisection noise is below 1e-10
    if (est.roots[i].second > est.roots[i - 1].second + 2e-10) est.monotone = false;
  }
  est.point = est.roots.back().second;
  est.low = est.point;
  est.high = est.roots.front().second;
  if (!est.monotone) log::warn("truncated C4 roots are not monotone in n_max; the bracket is not trustworthy");
  return est;
}

C4Estimate estimate_C4(int L0, int n_max) {
  if (n_max < 1) throw InvalidArgument("estimate_C4 requires n_max >= 1");
  std::vector<DyadicProb> p{DyadicProb::zero()};
  for (int n = 1; n <= n_max; ++n) p.push_back(prob_L(n, L0));
  return estimate_C4(p, L0);
}

InequalityReport check_inequalities(const BTable& table) {
  InequalityReport report;
  const int n_max = table.config.n_max;
  const auto& rows = table.rows;
  for (int s = 1; s <= n_max; ++s) {
    for (int t = 1; s + t <= n_max; ++t) {
      ++report.submultiplicative_checks;
      const auto& bound = rows[static_cast<std::size_t>(s)].interval.upper * rows[static_cast<std::size_t>(t)].interval.upper;
      if (rows[static_cast<std::size_t>(s + t)].interval.lower > bound) ++report.submultiplicative_violations;
    }
  }
  for (int t = 0; t <= n_max; ++t) {
    for (int s = 0; t + s <= n_max; ++s) {
      ++report.doubling_checks;
      const DyadicProb bound = rows[static_cast<std::size_t>(t + s)].interval.upper.scaled_by_power_of_two(s);
      if (rows[static_cast<std::size_t>(t)].interval.lower > bound) ++report.doubling_violations;
    }
  }
  return report;
}

ConstantsReport constants_report(int L0, const EnumConfig& config) {
  EnumConfig cfg = config;
  cfg.L0 = L0;
  cfg.validate();

  ConstantsReport rep;
  rep.L0 = L0;
  rep.truncation = cfg;
  rep.prob_b_plus.push_back(DyadicProb::one());
  rep.prob_L.push_back(DyadicProb::zero());
  for (int n = 1; n <= cfg.n_max; ++n) {
    const auto e = enumerate_b_plus(n, L0, cfg.node_budget);
    rep.prob_b_plus.push_back(e.b_plus);
    rep.prob_L.push_back(e.irreducible);
    rep.nodes += e.nodes;
  }
  const BTable table = enumerate_B(cfg);
  rep.nodes += table.nodes;
  for (const auto& row : table.rows) rep.prob_B.push_back(row.interval);
  rep.inequalities = check_inequalities(table);

  rep.c4 = estimate_C4(rep.prob_L, L0);
  const double c = rep.c4.point;

  rep.f.assign(rep.prob_L.size(), 0.0);
  rep.u.assign(rep.prob_b_plus.size(), 0.0);
  double mu = 0.0;
  for (std::size_t n = 0; n < rep.prob_L.size(); ++n) {
    const double scale = std::exp(c * static_cast<double>(n));
    rep.f[n] = scale * rep.prob_L[n].to_double();
    rep.u[n] = scale * rep.prob_b_plus[n].to_double();
    mu += static_cast<double>(n) * rep.f[n];
  }
  rep.mu_hat = mu;
  rep.C6_hat = 1.0 / mu;

  // P(B_t) >= e^{-C4 t} for every t, so -log(upper)/t never exceeds C4.
  for (int n = 1; n <= cfg.n_max; ++n) {
    const double bound = -rep.prob_B[static_cast<std::size_t>(n)].upper.log() / n;
    if (bound > rep.c4_certified_lower) {
      rep.c4_certified_lower = bound;
      rep.c4_certified_lower_n = n;
    }
  }

  rep.C3_witness = 1.0;
  for (int n = 1; n <= cfg.n_max; ++n) {
    const auto ni = static_cast<std::size_t>(n);
    rep.C3_witness = std::min(rep.C3_witness, rep.prob_b_plus[ni].to_double() / rep.prob_B[ni].upper.to_double());
  }
  const auto last = static_cast<std::size_t>(cfg.n_max);
  rep.C5_hat = rep.prob_b_plus[last].to_double() / rep.prob_B[last].midpoint();
  const double scale = std::exp(c * static_cast<double>(cfg.n_max));
  rep.C7_bracket = {scale * rep.prob_B[last].lower.to_double(), scale * rep.prob_B[last].upper.to_double()};

  const std::size_t first = last - (last - 1) / 3;
  double lo = rep.u[first];
  double hi = rep.u[first];
  double sum = 0.0;
  for (std::size_t n = first; n <= last; ++n) {
    lo = std::min(lo, rep.u[n]);
    hi = std::max(hi, rep.u[n]);
    sum += rep.u[n];
  }
  rep.u_variation_last_third = (hi - lo) / (sum / static_cast<double>(last - first + 1));
  return rep;
}

// ---------------------------------------------------------------------------
// Excursion classes
// ---------------------------------------------------------------------------

namespace {

// Walks with local times <= L0 up to length m_max. A prefix ending at a new
// strict maximum h >= 1 is a class member iff no level in [1, h) is a cut,
// and a level l < h is a cut exactly when it has been visited once so far.
class ExcursionSearch {
 public:
  ExcursionSearch(int L0, int m_max, bool allow_negative, std::uint64_t budget)
      : L0_(L0), m_max_(m_max), allow_negative_(allow_negative), budget_(budget),
        offset_(m_max), counts_(static_cast<std::size_t>(2 * m_max + 2), 0) {}

  std::vector<LatticePath> run() {
    descend(0, 0);
    return std::move(found_);
  }

 private:
  int& count(int site) { return counts_[static_cast<std::size_t>(site + offset_)]; }

  void descend(int pos, int running_max) {
    check_budget(++nodes_, budget_);
    if (static_cast<int>(steps_.size()) == m_max_) return;
    for (int step : {1, -1}) {
      const int next = pos + step;
      if (!allow_negative_ && next <= 0) continue;
      int& c = count(next);
      if (c >= L0_) continue;
      ++c;
      steps_.push_back(static_cast<lattice::Step>(step));
      if (next > running_max && next >= 1 && no_cut_below(next)) found_.emplace_back(steps_);
      descend(next, std::max(running_max, next));
      steps_.pop_back();
      --c;
    }
  }

  bool no_cut_below(int top) {
    for (int level = 1; level < top; ++level) {
      if (count(level) < 2) return false;
    }
    return true;
  }

  int L0_;
  int m_max_;
  bool allow_negative_;
  std::uint64_t budget_;
  int offset_;
  std::vector<int> counts_;
  std::vector<lattice::Step> steps_;
  std::vector<LatticePath> found_;
  std::uint64_t nodes_ = 0;
};

}  // namespace

std::vector<LatticePath> enumerate_excursions(int L0, int m_max, bool allow_negative, std::uint64_t node_budget) {
  lattice::EventParams{L0, 0}.validate();
  if (m_max < 1) throw InvalidArgument("enumerate_excursions requires m_max >= 1");
  return ExcursionSearch(L0, m_max, allow_negative, node_budget).run();
}

std::vector<ClassSumRow> excursion_class_sums(int L0, int k_max, int m_max_tilde) {
  if (k_max < 1) throw InvalidArgument("excursion_class_sums requires k_max >= 1");
  const int m_max = static_cast<int>(lattice::max_b_plus_length(k_max, L0));
  const auto positive = enumerate_excursions(L0, m_max, false);
  const auto first = enumerate_excursions(L0, std::max(m_max, m_max_tilde), true);

  std::vector<ClassSumRow> rows(static_cast<std::size_t>(k_max));
  for (int k = 1; k <= k_max; ++k) {
    rows[static_cast<std::size_t>(k - 1)].k = k;
    rows[static_cast<std::size_t>(k - 1)].prob_L = prob_L(k, L0);
  }
  const auto add = [&](const std::vector<LatticePath>& paths, DyadicProb ClassSumRow::*field) {
    for (const auto& p : paths) {
      const int h = p.end_position();
      if (h < 1 || h > k_max) continue;
      rows[static_cast<std::size_t>(h - 1)].*field +=
          DyadicProb::inverse_power_of_two(static_cast<std::uint32_t>(p.length()));
    }
  };
  add(positive, &ClassSumRow::class_M);
  add(first, &ClassSumRow::class_M_tilde);
  for (auto& row : rows) {
    row.M_matches = row.class_M == row.prob_L;
    row.M_tilde_matches = row.class_M_tilde == row.prob_L;
  }
  return rows;
}

}  // namespace blt::enumeration
