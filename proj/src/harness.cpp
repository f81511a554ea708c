#include "distdom/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace distdom {

OracleCapExceeded::OracleCapExceeded(double count, double cap)
    : std::runtime_error("exhaustive enumeration needs " + std::to_string(static_cast<long double>(count)) +
                         " deterministic policies, cap is " + std::to_string(static_cast<long double>(cap))),
      count_(count) {}

namespace {

// States with a decision at timestep t, for t = 0 .. horizon-1.
std::vector<std::vector<std::size_t>> reachable_by_time(const Momdp& m) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<bool> current(m.num_states(), false);
  current[0] = true;
  for (std::size_t t = 0; t < m.horizon(); ++t) {
    std::vector<std::size_t> states;
    std::vector<bool> next(m.num_states(), false);
    for (std::size_t s = 0; s < m.num_states(); ++s) {
      if (!current[s]) continue;
      states.push_back(s);
      for (std::size_t a = 0; a < m.num_actions(); ++a) {
        for (const auto& succ : m.successors(s, a)) next[succ.state] = true;
      }
    }
    out.push_back(std::move(states));
    current = std::move(next);
  }
  return out;
}

std::string fmt(double x, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  return buf;
}

}  // namespace

double count_time_indexed_policies(const Momdp& momdp) {
  momdp.validate();
  double count = 1.0;
  for (const auto& states : reachable_by_time(momdp)) {
    count *= std::pow(static_cast<double>(momdp.num_actions()), static_cast<double>(states.size()));
  }
  return count;
}

SolutionSet exhaustive_dus(const Momdp& momdp, double policy_cap, int precision) {
  const double count = count_time_indexed_policies(momdp);
  if (count > policy_cap) throw OracleCapExceeded(count, policy_cap);
  const auto levels = reachable_by_time(momdp);
  const std::size_t S = momdp.num_states();
  const std::size_t A = momdp.num_actions();
  const std::size_t d = momdp.num_objectives();

  // decision[t][s] for the current policy; advanced as a mixed-radix counter
  std::vector<std::vector<std::size_t>> decision(levels.size(), std::vector<std::size_t>(S, 0));
  std::map<std::vector<double>, ReturnDistribution> unique;  // keyed by flattened atoms
  const auto total = static_cast<std::size_t>(count);
  for (std::size_t p = 0; p < total; ++p) {
    std::map<std::pair<std::size_t, Vector>, double> frontier{{{0, Vector(d, 0.0)}, 1.0}};
    double discount = 1.0;
    for (std::size_t t = 0; t < levels.size(); ++t) {
      std::map<std::pair<std::size_t, Vector>, double> next;
      for (const auto& [key, prob] : frontier) {
        const auto& [s, ret] = key;
        for (const auto& succ : momdp.successors(s, decision[t][s])) {
          for (std::size_t i = 0; i < succ.reward.size(); ++i) {
            Vector g = ret;
            auto r = succ.reward.value(i);
            for (std::size_t k = 0; k < d; ++k) g[k] += discount * r[k];
            next[{succ.state, std::move(g)}] += prob * succ.prob * succ.reward.prob(i);
          }
        }
      }
      frontier = std::move(next);
      discount *= momdp.gamma();
    }
    std::vector<Atom> atoms;
    for (const auto& [key, prob] : frontier) atoms.push_back({key.second, prob});
    const auto dist = round_to_precision(ReturnDistribution(d, std::move(atoms)), precision);
    std::vector<double> flat;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      auto v = dist.value(i);
      flat.insert(flat.end(), v.begin(), v.end());
      flat.push_back(dist.prob(i));
    }
    unique.emplace(std::move(flat), dist);

    // advance the counter
    for (std::size_t t = 0; t < levels.size(); ++t) {
      bool carry = true;
      for (std::size_t s : levels[t]) {
        if (++decision[t][s] < A) {
          carry = false;
          break;
        }
        decision[t][s] = 0;
      }
      if (!carry) break;
    }
  }
  std::vector<ReturnDistribution> dists;
  for (auto& [key, dist] : unique) dists.push_back(std::move(dist));
  return SolutionSet::from_distributions(d_prune(dists), precision);
}

// ---------------------------------------------------------------------------

double RunRow::percent(std::size_t n) const {
  return dus == 0 ? 0.0 : 100.0 * static_cast<double>(n) / static_cast<double>(dus);
}

RunRow run_single(const GeneratorConfig& generator, const LearnerConfig& learner,
                  std::uint64_t seed, bool time_indexed_states, RunSets* sets) {
  RunRow row;
  row.config = generator.name;
  row.seed = seed;
  try {
    GeneratorConfig g = generator;
    g.seed = seed;
    LearnerConfig l = learner;
    l.seed = seed;
    Momdp momdp = generate(g);
    if (time_indexed_states) momdp = time_indexed(momdp);
    TrainStats stats;
    SolutionSet dus = train(momdp, l, std::nullopt, &stats);
    row.estimation_seconds = stats.estimation_seconds;
    row.training_seconds = stats.training_seconds;
    if (dus.empty()) throw std::runtime_error("learner returned an empty set");
    RunSets out{dus, cd_prune(dus, ConvexMode::joint), p_prune(dus), ch_prune(dus)};
    row.dus = out.dus.size();
    row.cdus = out.cdus.size();
    row.pf = out.pf.size();
    row.ch = out.ch.size();
    if (sets) *sets = std::move(out);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

MetricSummary summarise(const std::vector<double>& values) {
  MetricSummary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

ExperimentReport run_experiment(const std::vector<ExperimentCell>& matrix, std::size_t jobs) {
  struct Task {
    std::size_t cell;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < matrix.size(); ++c) {
    for (auto seed : matrix[c].seeds) tasks.push_back({c, seed});
  }
  ExperimentReport report;
  report.rows.resize(tasks.size());
  report.sets.resize(tasks.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const auto& cell = matrix[tasks[i].cell];
      RunSets sets;
      report.rows[i] = run_single(cell.generator, cell.learner, tasks[i].seed,
                                  cell.time_indexed_states, &sets);
      if (report.rows[i].error.empty()) report.sets[i] = std::move(sets);
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(tasks.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::size_t i = 0;
  for (const auto& cell : matrix) {
    std::vector<double> dus, cdus, pf, ch, est, tr;
    for (std::size_t k = 0; k < cell.seeds.size(); ++k, ++i) {
      const RunRow& r = report.rows[i];
      if (!r.error.empty()) continue;
      dus.push_back(static_cast<double>(r.dus));
      cdus.push_back(r.percent(r.cdus));
      pf.push_back(r.percent(r.pf));
      ch.push_back(r.percent(r.ch));
      est.push_back(r.estimation_seconds);
      tr.push_back(r.training_seconds);
    }
    if (dus.empty()) continue;
    report.aggregates.push_back({cell.generator.name, dus.size(), summarise(dus), summarise(cdus),
                                 summarise(pf), summarise(ch), summarise(est), summarise(tr)});
  }
  return report;
}

std::string report_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "config,seed,dus,cdus,pf,ch,cdus_pct,pf_pct,ch_pct,status\n";
  for (const auto& r : report.rows) {
    os << r.config << ',' << r.seed << ',';
    if (r.error.empty()) {
      os << r.dus << ',' << r.cdus << ',' << r.pf << ',' << r.ch << ',' << fmt(r.percent(r.cdus), 2)
         << ',' << fmt(r.percent(r.pf), 2) << ',' << fmt(r.percent(r.ch), 2) << ",ok\n";
    } else {
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      os << ",,,,,,,error: " << msg << '\n';
    }
  }
  for (const auto& a : report.aggregates) {
    os << a.config << ",mean," << fmt(a.dus.mean, 2) << ",,,," << fmt(a.cdus_pct.mean, 2) << ','
       << fmt(a.pf_pct.mean, 2) << ',' << fmt(a.ch_pct.mean, 2) << ",ok\n";
  }
  return os.str();
}

std::string timings_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "config,seed,estimation_seconds,training_seconds\n";
  for (const auto& r : report.rows) {
    if (!r.error.empty()) continue;
    os << r.config << ',' << r.seed << ',' << fmt(r.estimation_seconds, 3) << ','
       << fmt(r.training_seconds, 3) << '\n';
  }
  for (const auto& a : report.aggregates) {
    const std::pair<const char*, double MetricSummary::*> stats[] = {
        {"mean", &MetricSummary::mean}, {"sd", &MetricSummary::sd},
        {"min", &MetricSummary::min}, {"max", &MetricSummary::max}};
    for (const auto& [label, member] : stats) {
      os << a.config << ',' << label << ',' << fmt(a.estimation_seconds.*member, 3) << ','
         << fmt(a.training_seconds.*member, 3) << '\n';
    }
  }
  return os.str();
}

std::string summary_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "config,runs,metric,mean,sd,min,max\n";
  for (const auto& a : report.aggregates) {
    const std::pair<const char*, const MetricSummary*> metrics[] = {
        {"dus", &a.dus}, {"cdus_pct", &a.cdus_pct}, {"pf_pct", &a.pf_pct}, {"ch_pct", &a.ch_pct}};
    for (const auto& [name, m] : metrics) {
      os << a.config << ',' << a.runs << ',' << name << ',' << fmt(m->mean, 2) << ',' << fmt(m->sd, 2)
         << ',' << fmt(m->min, 2) << ',' << fmt(m->max, 2) << '\n';
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------

std::vector<UtilityRanking> evaluate_utilities(const SolutionSet& set,
                                               const std::vector<UtilityFunction>& utilities) {
  if (set.empty()) throw std::invalid_argument("evaluate: empty solution set");
  std::set<std::string> pf_ids;
  for (const auto& id : p_prune(set).ids()) pf_ids.insert(id);

  std::vector<UtilityRanking> out;
  for (const auto& u : utilities) {
    UtilityRanking r;
    r.utility = u.name();
    for (const auto& e : set.entries()) {
      r.scores.push_back({e.id, expected_utility(e.dist, u), pf_ids.count(e.id) > 0});
    }
    std::stable_sort(r.scores.begin(), r.scores.end(),
                     [](const UtilityScore& a, const UtilityScore& b) { return a.value > b.value; });
    r.best_id = r.scores.front().id;
    r.best_value = r.scores.front().value;
    for (const auto& s : r.scores) {
      if (s.value >= r.best_value - 1e-9) r.tied_best.push_back(s.id);
    }
    for (const auto& s : r.scores) {
      if (s.in_pf) {
        r.best_pf_id = s.id;
        r.best_pf_value = s.value;
        break;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace distdom
