#include <cstdlib>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "distdom/harness.hpp"
#include "distdom/io.hpp"
#include "distdom/linprog.hpp"

namespace fs = std::filesystem;
using namespace distdom;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kInvalidInput = 2, kCapExceeded = 3, kSolverFailure = 4 };

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
};

fs::path out_dir(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("DISTDOM_OUT"); env && *env) return env;
  return "distdom-out";
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--out", c.out, "Output directory (default: $DISTDOM_OUT or ./distdom-out)");
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

void emit(const fs::path& path, const std::string& text) {
  write_text_file(path, text);
  std::cout << path.string() << '\n';
}

std::string set_csv(const SolutionSet& set) {
  std::ostringstream os;
  os.precision(17);
  os << "id,atom,prob";
  for (std::size_t k = 0; k < set.dim(); ++k) os << ",v" << k + 1;
  os << '\n';
  for (const auto& e : set.entries()) {
    for (std::size_t i = 0; i < e.dist.size(); ++i) {
      os << e.id << ',' << i << ',' << e.dist.prob(i);
      for (double v : e.dist.value(i)) os << ',' << v;
      os << '\n';
    }
  }
  return os.str();
}

std::string momdp_csv(const Momdp& m) {
  std::ostringstream os;
  os.precision(17);
  os << "state,action,next_state,prob,reward_prob";
  for (std::size_t k = 0; k < m.num_objectives(); ++k) os << ",r" << k + 1;
  os << '\n';
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
      for (const auto& succ : m.successors(s, a)) {
        for (std::size_t i = 0; i < succ.reward.size(); ++i) {
          os << s << ',' << a << ',' << succ.state << ',' << succ.prob << ',' << succ.reward.prob(i);
          for (double v : succ.reward.value(i)) os << ',' << v;
          os << '\n';
        }
      }
    }
  }
  return os.str();
}

void emit_set(const fs::path& dir, const std::string& stem, const SolutionSet& set, const std::string& format) {
  if (format == "csv") {
    emit(dir / (stem + ".csv"), set_csv(set));
  } else {
    emit(dir / (stem + ".json"), dump(to_json(set)));
  }
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      if (auto dash = part.find('-'); dash != std::string::npos) {
        const auto lo = std::stoull(part.substr(0, dash));
        const auto hi = std::stoull(part.substr(dash + 1));
        if (hi < lo) throw std::invalid_argument("descending range");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      } else {
        seeds.push_back(std::stoull(part));
      }
    } catch (const std::logic_error&) {
      throw std::invalid_argument("bad seed list '" + text + "'");
    }
  }
  if (seeds.empty()) throw std::invalid_argument("empty seed list");
  return seeds;
}

std::size_t parse_set_limit(const std::string& text) {
  if (text == "inf" || text == "none" || text == "unlimited") return kUnlimitedSetSize;
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(text, &pos);
    if (pos != text.size() || v == 0) throw std::invalid_argument("");
    return v;
  } catch (const std::logic_error&) {
    throw std::invalid_argument("set limit must be a positive integer or 'inf'");
  }
}

Representative parse_representative(const std::string& text) {
  if (text == "mixture") return Representative::mixture;
  if (text == "medoid") return Representative::medoid;
  throw std::invalid_argument("representative must be 'mixture' or 'medoid'");
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  Common common;
  std::string preset = "small";
  std::string config;
};

int cmd_generate(const GenerateArgs& args) {
  GeneratorConfig cfg = preset_config(args.preset);
  if (!args.config.empty()) cfg = generator_config_from_json(read_json_file(args.config), cfg);
  if (args.common.seed) cfg.seed = *args.common.seed;
  cfg.validate();
  const Momdp m = generate(cfg);
  const auto dir = out_dir(args.common);
  if (args.common.format == "csv") {
    emit(dir / "momdp.csv", momdp_csv(m));
  } else {
    emit(dir / "momdp.json", dump(to_json(m)));
  }
  return kOk;
}

struct LearnArgs {
  Common common;
  std::string momdp;
  std::string config;
  std::optional<std::size_t> episodes;
  std::optional<std::size_t> walks;
  std::string set_limit;
  std::string representative;
  std::string kernel;
  bool exact_kernel = false;
  bool time_indexed_states = false;
  std::string checkpoint;
  std::size_t checkpoint_every = 0;
  std::optional<std::size_t> stop_after;
  std::string resume;
};

int cmd_learn(const LearnArgs& args) {
  Momdp m = momdp_from_json(read_json_file(args.momdp));
  if (args.time_indexed_states) m = time_indexed(m);
  const auto dir = out_dir(args.common);

  std::optional<Learner> learner;
  if (!args.resume.empty()) {
    std::ifstream in(args.resume);
    if (!in) throw std::invalid_argument("cannot open '" + args.resume + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    learner.emplace(Learner::from_checkpoint(m, buf.str()));
  } else {
    LearnerConfig cfg;
    if (!args.config.empty()) cfg = learner_config_from_json(read_json_file(args.config), cfg);
    if (args.episodes) cfg.episodes = *args.episodes;
    if (args.walks) cfg.random_walks = *args.walks;
    if (!args.set_limit.empty()) cfg.set_limit = parse_set_limit(args.set_limit);
    if (!args.representative.empty()) cfg.representative = parse_representative(args.representative);
    if (args.common.seed) cfg.seed = *args.common.seed;
    cfg.validate(m.num_objectives());
    std::optional<TransitionEstimate> kernel;
    if (args.exact_kernel) {
      kernel = exact_transitions(m);
    } else if (!args.kernel.empty()) {
      kernel = transition_estimate_from_json(read_json_file(args.kernel));
    }
    learner.emplace(m, cfg, std::move(kernel));
    if (learner->stats().unvisited_pairs > 0) {
      std::cerr << "warning: " << learner->stats().unvisited_pairs
                << " state-action pairs never visited during estimation; using a uniform kernel for them\n";
    }
  }

  const fs::path ckpt = args.checkpoint.empty() ? fs::path() : fs::path(args.checkpoint);
  const std::size_t chunk = args.checkpoint_every > 0 ? args.checkpoint_every : std::numeric_limits<std::size_t>::max();
  std::size_t budget = args.stop_after.value_or(std::numeric_limits<std::size_t>::max());
  while (!learner->done() && budget > 0) {
    const std::size_t before = learner->episode();
    learner->run(std::min(chunk, budget));
    budget -= learner->episode() - before;
    if (!ckpt.empty()) write_text_file(ckpt, learner->checkpoint());
  }
  if (!ckpt.empty()) write_text_file(ckpt, learner->checkpoint());
  if (!learner->done()) {
    std::cerr << "stopped after " << learner->episode() << " episodes\n";
    return kOk;
  }

  const auto& stats = learner->stats();
  std::cerr << "episodes " << learner->episode() << ", estimation " << stats.estimation_seconds
            << " s, training " << stats.training_seconds << " s\n";
  emit_set(dir, "dus", learner->result(), args.common.format);
  return kOk;
}

struct PruneArgs {
  Common common;
  std::string in;
  std::string to;
  bool marginal_only = false;
};

int cmd_prune(const PruneArgs& args) {
  const SolutionSet set = solution_set_from_json(read_json_file(args.in));
  if (set.empty()) throw std::invalid_argument("prune: empty solution set");
  SolutionSet out;
  if (args.to == "pf") {
    out = p_prune(set);
  } else if (args.to == "ch") {
    out = ch_prune(set);
  } else if (args.to == "dus") {
    out = d_prune(set);
  } else {
    out = cd_prune(set, args.marginal_only ? ConvexMode::marginal_only : ConvexMode::joint);
  }
  emit_set(out_dir(args.common), args.to, out, args.common.format);
  return kOk;
}

struct EvaluateArgs {
  Common common;
  std::string in;
  std::vector<std::string> utilities;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const SolutionSet set = solution_set_from_json(read_json_file(args.in));
  std::vector<UtilityFunction> utilities;
  const std::vector<std::string> names =
      args.utilities.empty() ? std::vector<std::string>{"product", "leontief", "smooth-log-product", "linear"}
                             : args.utilities;
  for (const auto& name : names) utilities.push_back(UtilityFunction::parse(name, set.dim()));
  const auto rankings = evaluate_utilities(set, utilities);
  const auto dir = out_dir(args.common);

  if (args.common.format == "csv") {
    std::ostringstream os;
    os.precision(12);
    os << "utility,rank,id,value,in_pf,best,best_pf\n";
    for (const auto& r : rankings) {
      std::size_t rank = 1;
      for (const auto& s : r.scores) {
        const bool best = std::find(r.tied_best.begin(), r.tied_best.end(), s.id) != r.tied_best.end();
        os << r.utility << ',' << rank++ << ',' << s.id << ',' << s.value << ',' << (s.in_pf ? 1 : 0) << ','
           << (best ? 1 : 0) << ',' << (s.id == r.best_pf_id ? 1 : 0) << '\n';
      }
    }
    emit(dir / "evaluation.csv", os.str());
  } else {
    Json j = Json::array();
    for (const auto& r : rankings) {
      Json scores = Json::array();
      for (const auto& s : r.scores) scores.push_back(Json{{"id", s.id}, {"value", s.value}, {"in_pf", s.in_pf}});
      j.push_back(Json{{"utility", r.utility},
                       {"best", r.best_id},
                       {"best_value", r.best_value},
                       {"tied_best", r.tied_best},
                       {"best_pf", r.best_pf_id},
                       {"best_pf_value", r.best_pf_value},
                       {"scores", std::move(scores)}});
    }
    emit(dir / "evaluation.json", dump(j));
  }
  for (const auto& r : rankings) {
    std::cout << r.utility << ": best " << r.best_id << " (" << r.best_value << ")";
    if (r.tied_best.size() > 1) std::cout << " tied with " << r.tied_best.size() - 1 << " other(s)";
    std::cout << "; best in PF " << r.best_pf_id << " (" << r.best_pf_value << ")\n";
  }
  return kOk;
}

struct ExperimentArgs {
  Common common;
  std::vector<std::string> presets;
  std::string matrix;
  std::string seeds;
  std::optional<std::size_t> walks;
  std::optional<std::size_t> episodes;
  std::size_t jobs = 1;
  bool time_indexed_states = false;
};

std::vector<ExperimentCell> load_matrix(const fs::path& path) {
  const Json j = read_json_file(path);
  const Json& cells = j.is_array() ? j : j.at("cells");
  std::vector<ExperimentCell> out;
  for (const auto& c : cells) {
    ExperimentCell cell;
    cell.generator = generator_config_from_json(c.value("generator", Json::object()));
    cell.learner = learner_config_from_json(c.value("learner", Json::object()));
    if (!c.contains("learner") || !c.at("learner").contains("set_limit")) {
      cell.learner.set_limit = cell.generator.set_limit;
    }
    if (c.contains("seeds")) cell.seeds = c.at("seeds").get<std::vector<std::uint64_t>>();
    cell.time_indexed_states = c.value("time_indexed_states", false);
    out.push_back(std::move(cell));
  }
  return out;
}

int cmd_experiment(const ExperimentArgs& args) {
  std::vector<ExperimentCell> matrix;
  if (!args.matrix.empty()) {
    matrix = load_matrix(args.matrix);
  } else {
    for (const auto& p : args.presets.empty() ? std::vector<std::string>{"small"} : args.presets) {
      ExperimentCell cell;
      cell.generator = preset_config(p);
      cell.learner.set_limit = cell.generator.set_limit;
      matrix.push_back(std::move(cell));
    }
  }
  std::vector<std::uint64_t> seeds;
  if (!args.seeds.empty()) {
    seeds = parse_seeds(args.seeds);
  } else if (args.common.seed) {
    seeds = {*args.common.seed};
  } else {
    seeds = {1, 2, 3, 4, 5};
  }
  for (auto& cell : matrix) {
    if (cell.seeds.empty() || !args.seeds.empty() || args.common.seed) cell.seeds = seeds;
    if (args.walks) cell.learner.random_walks = *args.walks;
    if (args.episodes) cell.learner.episodes = *args.episodes;
    if (args.time_indexed_states) cell.time_indexed_states = true;
    cell.generator.validate();
    cell.learner.validate(cell.generator.num_objectives);
  }

  const auto report = run_experiment(matrix, args.jobs);
  const auto dir = out_dir(args.common);
  emit(dir / "report.csv", report_csv(report));
  emit(dir / "timings.csv", timings_csv(report));
  emit(dir / "summary.csv", summary_csv(report));
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    if (!row.error.empty()) {
      std::cerr << "run " << row.config << " seed " << row.seed << " failed: " << row.error << '\n';
      continue;
    }
    const auto& sets = *report.sets[i];
    const fs::path run_dir = dir / row.config / ("seed" + std::to_string(row.seed));
    emit_set(run_dir, "dus", sets.dus, args.common.format);
    emit_set(run_dir, "cdus", sets.cdus, args.common.format);
    emit_set(run_dir, "pf", sets.pf, args.common.format);
    emit_set(run_dir, "ch", sets.ch, args.common.format);
  }
  return kOk;
}

struct OracleArgs {
  Common common;
  std::string momdp;
  double cap = kDefaultPolicyCap;
};

int cmd_oracle(const OracleArgs& args) {
  const Momdp m = momdp_from_json(read_json_file(args.momdp));
  emit_set(out_dir(args.common), "oracle_dus", exhaustive_dus(m, args.cap), args.common.format);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributional multi-objective decision making: generation, learning, pruning, evaluation"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a random MOMDP");
  add_common(g, gen.common);
  g->add_option("--preset", gen.preset, "small, medium or large")->check(CLI::IsMember({"small", "medium", "large"}));
  g->add_option("--config", gen.config, "Generator config JSON (overrides preset fields)");

  LearnArgs learn;
  auto* l = app.add_subcommand("learn", "Train DIMOQ on a MOMDP and write the DUS");
  add_common(l, learn.common);
  l->add_option("--momdp", learn.momdp, "MOMDP JSON")->required();
  l->add_option("--config", learn.config, "Learner config JSON");
  l->add_option("--episodes", learn.episodes, "Training episodes");
  l->add_option("--walks", learn.walks, "Random walks for kernel estimation");
  l->add_option("--set-limit", learn.set_limit, "Maximum Q-set size, or 'inf'");
  l->add_option("--representative", learn.representative, "Cluster representative: mixture or medoid");
  l->add_option("--kernel", learn.kernel, "Transition estimate JSON to use instead of random walks");
  l->add_flag("--exact-kernel", learn.exact_kernel, "Use the true transition kernel");
  l->add_flag("--time-indexed-states", learn.time_indexed_states, "Learn over (state, timestep) pairs");
  l->add_option("--checkpoint", learn.checkpoint, "Write a resumable checkpoint to this file");
  l->add_option("--checkpoint-every", learn.checkpoint_every, "Episodes between checkpoints");
  l->add_option("--stop-after", learn.stop_after, "Stop after this many episodes in this invocation (requires --checkpoint)");
  l->add_option("--resume", learn.resume, "Resume from a checkpoint file");
  l->get_option("--stop-after")->needs("--checkpoint");
  l->get_option("--exact-kernel")->excludes("--kernel");

  PruneArgs prune;
  auto* p = app.add_subcommand("prune", "Prune a solution set");
  add_common(p, prune.common);
  p->add_option("--in", prune.in, "Solution set JSON")->required();
  p->add_option("--to", prune.to, "Target set")->required()->check(CLI::IsMember({"pf", "ch", "dus", "cdus"}));
  p->add_flag("--marginal-only", prune.marginal_only, "CDUS variant without the joint-CDF constraints");

  EvaluateArgs eval;
  auto* e = app.add_subcommand("evaluate", "Rank a solution set by expected utility");
  add_common(e, eval.common);
  e->add_option("--in", eval.in, "Solution set JSON")->required();
  e->add_option("--utility", eval.utilities,
                "product, leontief, smooth-log-product, linear or linear:w1,w2,... (repeatable)");

  ExperimentArgs exp;
  auto* x = app.add_subcommand("experiment", "Run an experiment matrix and write CSV reports");
  add_common(x, exp.common);
  x->add_option("--preset", exp.presets, "Preset configs (repeatable)")
      ->check(CLI::IsMember({"small", "medium", "large"}));
  x->add_option("--matrix", exp.matrix, "Matrix JSON");
  x->add_option("--seeds", exp.seeds, "Seed list, e.g. 1-5 or 1,3,7");
  x->add_option("--walks", exp.walks, "Random walks per run");
  x->add_option("--episodes", exp.episodes, "Training episodes per run");
  x->add_option("--jobs", exp.jobs, "Parallel runs")->check(CLI::PositiveNumber);
  x->add_flag("--time-indexed-states", exp.time_indexed_states, "Learn over (state, timestep) pairs");
  x->get_option("--matrix")->excludes("--preset");

  OracleArgs oracle;
  auto* o = app.add_subcommand("oracle-dus", "Exact DUS by enumerating deterministic policies");
  add_common(o, oracle.common);
  o->add_option("--momdp", oracle.momdp, "MOMDP JSON")->required();
  o->add_option("--cap", oracle.cap, "Maximum number of policies")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kInvalidInput;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*l) return cmd_learn(learn);
    if (*p) return cmd_prune(prune);
    if (*e) return cmd_evaluate(eval);
    if (*x) return cmd_experiment(exp);
    if (*o) return cmd_oracle(oracle);
  } catch (const OracleCapExceeded& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kCapExceeded;
  } catch (const SolverError& err) {
    std::cerr << "solver failure: " << err.what() << '\n';
    return kSolverFailure;
  } catch (const std::invalid_argument& err) {
    std::cerr << "invalid input: " << err.what() << '\n';
    return kInvalidInput;
  } catch (const std::out_of_range& err) {
    std::cerr << "invalid input: " << err.what() << '\n';
    return kInvalidInput;
  } catch (const nlohmann::json::exception& err) {
    std::cerr << "invalid input: " << err.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
