// infolearn: command-line front end.
//
//   infolearn classify --sigma 1 --tau 2
//   infolearn simulate --sigma 1 --tau 2 --omega 0 --trajectories 2000 --seed 7 --out runs/a
//
// Every subcommand writes its data files and a manifest.json (config echo,
// seed, timestamps, SHA-256 of each file) into the output directory.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "infolearn.hpp"
#include "infolearn/digest.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace infolearn;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kOutEnv = "INFOLEARN_OUT";
constexpr int kExitUsage = 64;
constexpr int kExitUndetermined = 2;
constexpr int kExitPartial = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Collects emitted files and writes the manifest at the end.
class Run {
 public:
  Run(std::string command, Config cfg, fs::path out_dir)
      : command_(std::move(command)), cfg_(std::move(cfg)), out_(std::move(out_dir)),
        started_(utc_now()) {
    fs::create_directories(out_);
  }

  const Config& config() const { return cfg_; }
  std::uint64_t seed() const { return cfg_.get_uint("run.seed", 0); }

  void emit(const std::string& name, const std::string& bytes) {
    fs::create_directories((out_ / name).parent_path());
    std::ofstream f(out_ / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (out_ / name).string());
    f << bytes;
    f.close();
    files_.push_back(name);
  }

  void finish() const {
    nlohmann::ordered_json m;
    m["artifact"] = "infolearn";
    m["version"] = kVersion;
    m["command"] = command_;
    m["master_seed"] = seed();
    m["started_at"] = started_;
    m["finished_at"] = utc_now();
    m["config"] = cfg_.serialize();
    auto& outs = m["outputs"] = nlohmann::ordered_json::array();
    for (const auto& name : files_) {
      const auto bytes = read_file_bytes(out_ / name);
      outs.push_back({{"file", name}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
    }
    std::ofstream f(out_ / "manifest.json");
    f << m.dump(2) << '\n';
  }

 private:
  std::string command_;
  Config cfg_;
  fs::path out_;
  std::string started_;
  std::vector<std::string> files_;
};

double require_double(const Config& cfg, const char* key, const char* flag) {
  const auto v = cfg.get_double(key);
  if (!v) throw UsageError(std::string("missing required option ") + flag);
  return *v;
}

LlrModel build_model(const Config& cfg, ModelSpec* spec_out = nullptr) {
  ModelSpec spec;
  spec.gaussian.sigma = require_double(cfg, "model.sigma", "--sigma");
  spec.gaussian.tau = cfg.get_double("model.tau", spec.gaussian.sigma);
  spec.gaussian.m0 = cfg.get_double("model.m0", 0.0);
  spec.mixture_alpha = cfg.get_double("model.mixture");
  if (spec_out) *spec_out = spec;
  return spec.build();
}

Action parse_action(const std::string& s) {
  if (s == "g" || s == "G") return Action::Good;
  if (s == "b" || s == "B") return Action::Bad;
  throw UsageError("action must be g or b, got '" + s + "'");
}

std::size_t positive_size(const Config& cfg, const char* key, std::uint64_t fallback) {
  const auto v = cfg.get_uint(key, fallback);
  if (v == 0) throw UsageError(std::string(key) + " must be positive");
  return static_cast<std::size_t>(v);
}

// ---------------------------------------------------------------------------

int cmd_classify(Run& run) {
  const auto& cfg = run.config();
  ModelSpec spec;
  const auto model = build_model(cfg, &spec);
  const double x_max = cfg.get_double("tails.x_max", 50.0);
  const auto n_grid = positive_size(cfg, "tails.grid", 64);

  auto empirical = classify_empirical(model, x_max, n_grid);
  TailClassification verdict = empirical;
  if (!spec.mixture_alpha) {
    verdict = classify_gaussian(spec.gaussian);
    verdict.evidence = std::move(empirical.evidence);
  }

  std::ostringstream csv;
  csv << "# verdict: " << to_string(verdict.verdict) << '\n';
  csv << "# method: " << (verdict.closed_form ? "closed-form" : "finite-grid") << '\n';
  if (!spec.mixture_alpha)
    csv << "# finite-grid verdict: " << to_string(empirical.verdict) << '\n';
  if (verdict.epsilon_estimate) csv << "# epsilon: " << fmt_double(*verdict.epsilon_estimate) << '\n';
  write_tail_evidence_csv(csv, verdict);
  run.emit("classify.csv", csv.str());

  std::cout << to_string(verdict.verdict) << '\n' << csv.str();
  return verdict.verdict == TailVerdict::Undetermined ? kExitUndetermined : 0;
}

int cmd_path(Run& run) {
  const auto& cfg = run.config();
  const auto model = build_model(cfg);
  const auto path = consensus_path(model, cfg.get_double("consensus.initial_r", 0.0),
                                   positive_size(cfg, "consensus.horizon", 50),
                                   parse_action(cfg.get_string("consensus.target", "g")));
  std::ostringstream csv;
  csv << "# target: " << to_char(path.target) << '\n';
  csv << "# absorbed: " << (path.absorbed ? "true" : "false") << '\n';
  write_path_csv(csv, path);
  run.emit("path.csv", csv.str());
  std::cout << csv.str();
  return 0;
}

Regime parse_regime(const std::string& s) {
  if (s == "f_g" || s == "g") return Regime::Good;
  if (s == "f_b" || s == "b") return Regime::Bad;
  if (s == "f_0" || s == "0") return Regime::Uninformative;
  throw UsageError("regime must be one of f_g, f_b, f_0");
}

int cmd_agree_prob(Run& run) {
  const auto& cfg = run.config();
  const auto model = build_model(cfg);
  const auto regime = parse_regime(cfg.get_string("consensus.regime", "f_0"));
  const double r0 = cfg.get_double("consensus.initial_r", 0.0);
  const auto horizon = positive_size(cfg, "consensus.horizon", 2000);
  const auto target = parse_action(cfg.get_string("consensus.target", "g"));

  const auto est = immediate_agreement_prob(model, regime, r0, horizon, target);
  const auto path = consensus_path(model, r0, horizon, target);
  const TailSum which{regime, target == Action::Good ? TailSide::Left : TailSide::Right};
  const auto div = divergence_test(model, path, which);

  std::ostringstream csv;
  csv << "# diverged: " << (est.diverged ? "true" : "false") << '\n';
  csv << "# verdict: " << to_string(est.verdict) << '\n';
  csv << "# truncated: " << fmt_double(est.truncated) << '\n';
  csv << "# lower: " << fmt_double(est.lower) << '\n';
  csv << "# upper: " << fmt_double(est.upper) << '\n';
  csv << "# tail_bound: " << fmt_double(est.tail_bound) << '\n';
  csv << "t,r,term,partial_sum\n";
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    csv << (i + 1) << ',' << fmt_double(path.values[i]) << ',' << fmt_double(div.terms[i]) << ','
        << fmt_double(div.partial_sums[i]) << '\n';
  }
  run.emit("agree_prob.csv", csv.str());
  std::cout << "diverged: " << (est.diverged ? "true" : "false") << '\n'
            << "verdict: " << to_string(est.verdict) << '\n'
            << "lower: " << fmt_double(est.lower) << '\n'
            << "upper: " << fmt_double(est.upper) << '\n';
  return 0;
}

ExperimentConfig experiment_config(const Config& cfg) {
  ExperimentConfig ec;
  build_model(cfg, &ec.model);
  ec.gamma = cfg.get_double("experiment.gamma", 0.5);
  const bool stress = cfg.get_bool("experiment.stress", false);
  ec.horizon = positive_size(cfg, "experiment.horizon", stress ? 100000 : 2000);
  ec.num_trajectories = positive_size(cfg, "experiment.trajectories", stress ? 10000 : 2000);
  ec.initial_r = cfg.get_double("experiment.initial_r", 0.0);
  ec.master_seed = cfg.get_uint("run.seed", 0);
  ec.workers = static_cast<unsigned>(cfg.get_uint("experiment.workers", 0));
  ec.record_q_trace = cfg.get_bool("experiment.record_q_trace", false);
  ec.record_switch_times = cfg.get_bool("experiment.record_switch_times", false);

  const auto omega = cfg.get_string("experiment.omega", "random");
  const auto theta = cfg.get_string("experiment.theta", "random");
  if (omega == "random") {
    ec.regime.mode = RegimeMode::Random;
  } else {
    if (omega != "0" && omega != "1") throw UsageError("omega must be 0, 1 or random");
    ec.regime.omega = omega == "1" ? Informativeness::Informative : Informativeness::Uninformative;
    if (theta == "random") {
      ec.regime.mode = RegimeMode::FixedOmega;
    } else {
      ec.regime.mode = RegimeMode::Fixed;
      ec.regime.theta = parse_action(theta);
    }
  }
  return ec;
}

int cmd_simulate(Run& run) {
  const auto ec = experiment_config(run.config());
  const auto res = run_experiment(ec);

  std::ostringstream rows;
  write_rows_csv(rows, res);
  run.emit("rows.csv", rows.str());

  auto agg = aggregates_json(res);
  agg["master_seed"] = ec.master_seed;
  run.emit("aggregates.json", agg.dump(2) + "\n");

  if (ec.record_q_trace) {
    for (std::size_t i = 0; i < res.q_traces.size(); ++i) {
      std::ostringstream q;
      q << "t,q\n";
      for (std::size_t t = 0; t < res.q_traces[i].size(); ++t)
        q << (t + 1) << ',' << fmt_double(res.q_traces[i][t]) << '\n';
      char name[48];
      std::snprintf(name, sizeof name, "q_traces/trajectory_%06zu.csv", i);
      run.emit(name, q.str());
    }
  }
  if (ec.record_switch_times) {
    std::ostringstream s;
    s << "index,switch_time\n";
    for (const auto& row : res.rows)
      for (auto t : row.switch_times) s << row.index << ',' << t << '\n';
    run.emit("switch_times.csv", s.str());
  }

  const auto& a = res.aggregates;
  std::cout << "trajectories: " << res.rows.size() << '\n';
  if (a.herd_correctness_rate)
    std::cout << "herd_correctness_rate: " << fmt_double(*a.herd_correctness_rate) << '\n';
  std::cout << "disagreement_fraction: " << fmt_double(a.disagreement_fraction) << '\n'
            << "median_q_T: " << fmt_double(a.q_all.q50) << '\n';
  return 0;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  Config tmp;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    tmp.set("grid.v", item);
    const auto v = tmp.get_double("grid.v");
    if (!v) throw UsageError("empty entry in m0 grid");
    grid.push_back(*v);
  }
  if (grid.empty()) throw UsageError("m0 grid is empty");
  return grid;
}

int cmd_same_variance(Run& run) {
  const auto& cfg = run.config();
  const double sigma = cfg.get_double("same_variance.sigma", 1.0);
  const auto grid = parse_grid(cfg.get_string("same_variance.m0", "0,0.25,0.5"));
  const auto table = same_variance_experiment(
      sigma, grid, cfg.get_double("experiment.gamma", 0.5),
      positive_size(cfg, "experiment.horizon", 2000),
      positive_size(cfg, "experiment.trajectories", 2000), cfg.get_uint("run.seed", 0),
      static_cast<unsigned>(cfg.get_uint("experiment.workers", 0)));

  std::ostringstream csv;
  csv << "# omega: 0\n";
  csv << "m0,disagreement_fraction,median_q_T,both_actions_second_half_fraction,mean_switch_count\n";
  for (const auto& row : table) {
    csv << fmt_double(row.m0) << ',' << fmt_double(row.disagreement_fraction) << ','
        << fmt_double(row.median_q) << ',' << fmt_double(row.both_actions_fraction) << ','
        << fmt_double(row.mean_switch_count) << '\n';
  }
  run.emit("same_variance.csv", csv.str());
  std::cout << csv.str();
  return 0;
}

int cmd_observer_replay(Run& run) {
  const auto& cfg = run.config();
  const auto model = build_model(cfg);
  const auto file = cfg.raw("observer.actions");
  if (!file) throw UsageError("missing required option --actions");
  std::ifstream in(*file);
  if (!in) throw UsageError("cannot read actions file " + *file);

  std::vector<Action> actions;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line != "G" && line != "B") throw UsageError("actions file: expected G or B, got '" + line + "'");
    actions.push_back(line == "G" ? Action::Good : Action::Bad);
  }

  ObserverState s = observer_init(cfg.get_double("experiment.gamma", 0.5),
                                  cfg.get_double("observer.initial_r", 0.0));
  std::ostringstream csv;
  csv << "t,q,log_odds\n";
  csv << 1 << ',' << fmt_double(s.q()) << ',' << fmt_double(s.log_odds()) << '\n';
  for (std::size_t i = 0; i < actions.size(); ++i) {
    s = observer_update(s, model, actions[i]);
    csv << (i + 2) << ',' << fmt_double(s.q()) << ',' << fmt_double(s.log_odds()) << '\n';
  }
  run.emit("observer.csv", csv.str());
  std::cout << csv.str();
  return 0;
}

// ---------------------------------------------------------------------------

struct Command {
  CLI::App* app;
  int (*fn)(Run&);
};

void bind(CLI::App* sub, Config& overrides, const std::string& flag, const std::string& key,
          const std::string& help) {
  sub->add_option_function<std::string>(
      flag, [&overrides, key](const std::string& v) { overrides.set(key, v); }, help);
}

void model_flags(CLI::App* sub, Config& ov) {
  bind(sub, ov, "--sigma", "model.sigma", "informative signal sd (required)");
  bind(sub, ov, "--tau", "model.tau", "uninformative signal sd (default: sigma)");
  bind(sub, ov, "--m0", "model.m0", "uninformative signal mean (default 0)");
  bind(sub, ov, "--mixture", "model.mixture",
       "use F_0 = a F_g + (1 - a) F_b with this weight instead of a Gaussian F_0");
}

void experiment_flags(CLI::App* sub, Config& ov) {
  bind(sub, ov, "--gamma", "experiment.gamma", "prior probability the source is informative");
  bind(sub, ov, "--horizon,-T", "experiment.horizon", "number of agents");
  bind(sub, ov, "--trajectories,-N", "experiment.trajectories", "number of trajectories");
  bind(sub, ov, "--workers", "experiment.workers", "worker threads (0: all cores)");
}

void stress_flag(CLI::App* sub, Config& ov) {
  sub->add_flag_function(
      "--stress", [&ov](std::int64_t) { ov.set("experiment.stress", "true"); },
      "default to T = 100000, N = 10000");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential social learning with uncertain source informativeness"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file, out_dir, seed;
  app.add_option("--config", config_file, "sectioned key = value config file");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out_dir, std::string("output directory (default $") + kOutEnv + " or .)");

  Config ov;
  std::vector<Command> commands;

  auto* classify = app.add_subcommand("classify", "relative tail thickness of F_0");
  model_flags(classify, ov);
  bind(classify, ov, "--x-max", "tails.x_max", "upper end of the evidence grid");
  bind(classify, ov, "--grid", "tails.grid", "number of grid points");
  commands.push_back({classify, cmd_classify});

  auto* path = app.add_subcommand("path", "consensus path r_{t+1} = r_t + D(r_t)");
  model_flags(path, ov);
  bind(path, ov, "--initial-r", "consensus.initial_r", "starting public LLR");
  bind(path, ov, "--horizon,-T", "consensus.horizon", "path length");
  bind(path, ov, "--target", "consensus.target", "consensus action g or b");
  commands.push_back({path, cmd_path});

  auto* agree = app.add_subcommand("agree-prob", "probability of immediate agreement");
  model_flags(agree, ov);
  bind(agree, ov, "--regime", "consensus.regime", "signal law: f_g, f_b or f_0");
  bind(agree, ov, "--initial-r", "consensus.initial_r", "starting public LLR");
  bind(agree, ov, "--horizon,-T", "consensus.horizon", "truncation horizon");
  bind(agree, ov, "--target", "consensus.target", "consensus action g or b");
  commands.push_back({agree, cmd_agree_prob});

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo batch with the observer attached");
  model_flags(simulate, ov);
  experiment_flags(simulate, ov);
  stress_flag(simulate, ov);
  bind(simulate, ov, "--omega", "experiment.omega", "0, 1 or random");
  bind(simulate, ov, "--theta", "experiment.theta", "g, b or random");
  bind(simulate, ov, "--initial-r", "experiment.initial_r", "starting public LLR");
  bind(simulate, ov, "--record-q-trace", "experiment.record_q_trace", "write every q_t");
  bind(simulate, ov, "--record-switch-times", "experiment.record_switch_times",
       "write every switch time");
  commands.push_back({simulate, cmd_simulate});

  auto* same = app.add_subcommand("same-variance", "equal-variance Gaussian sweep over m0");
  experiment_flags(same, ov);
  bind(same, ov, "--sigma", "same_variance.sigma", "common signal sd (default 1)");
  bind(same, ov, "--m0-grid", "same_variance.m0", "comma-separated m0 values");
  commands.push_back({same, cmd_same_variance});

  auto* replay = app.add_subcommand("observer-replay", "observer posterior along a given history");
  model_flags(replay, ov);
  bind(replay, ov, "--actions", "observer.actions", "file with one action (G or B) per line");
  bind(replay, ov, "--gamma", "experiment.gamma", "prior probability the source is informative");
  bind(replay, ov, "--initial-r", "observer.initial_r", "starting public LLR");
  commands.push_back({replay, cmd_observer_replay});

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const auto* chosen = &commands.front();
  for (const auto& c : commands)
    if (c.app->parsed()) chosen = &c;

  try {
    Config cfg;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw UsageError("cannot read config file " + config_file);
      cfg = Config::parse(in);
    }
    cfg.merge(ov);
    if (!seed.empty()) cfg.set("run.seed", seed);
    cfg.set("run.seed", std::to_string(cfg.get_uint("run.seed", 0)));

    if (out_dir.empty()) {
      const char* env = std::getenv(kOutEnv);
      out_dir = env && *env ? env : ".";
    }
    Run run(chosen->app->get_name(), std::move(cfg), out_dir);
    const int status = chosen->fn(run);
    run.finish();
    return status;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << chosen->app->help();
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << chosen->app->help();
    return kExitUsage;
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const PartialResultError& e) {
    std::cerr << "error: " << e.what() << " after " << e.completed() << " trajectories\n";
    return kExitPartial;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
