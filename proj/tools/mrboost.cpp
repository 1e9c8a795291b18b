// Command-line front end: dataset generation and the experiment subcommands.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrboost/config.hpp"
#include "mrboost/data.hpp"
#include "mrboost/game.hpp"
#include "mrboost/instances.hpp"
#include "mrboost/nn_boost.hpp"
#include "mrboost/robust.hpp"
#include "mrboost/weaklearn.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using mrb::ConfigError;
using mrb::ExperimentConfig;

namespace {

constexpr const char* kOutputEnv = "MRBOOST_OUTPUT_DIR";

struct Invocation {
  std::string config_path;
  std::string output_dir;
  std::vector<std::string> overrides;
};

ExperimentConfig load_config(const Invocation& inv) {
  ExperimentConfig config =
      inv.config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(inv.config_path);
  for (const std::string& o : inv.overrides) config.set(o);
  return config;
}

fs::path output_dir(const Invocation& inv) {
  fs::path dir = ".";
  if (!inv.output_dir.empty()) {
    dir = inv.output_dir;
  } else if (const char* env = std::getenv(kOutputEnv); env != nullptr && *env != '\0') {
    dir = env;
  }
  fs::create_directories(dir);
  return dir;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out.precision(17);
  out << v;
  return out.str();
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json config_echo(const ExperimentConfig& config) {
  json echo = json::object();
  for (const auto& [key, value] : config.resolved()) echo[key] = value;
  return echo;
}

json nullable(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

mrb::LabeledDataset load_or_generate(ExperimentConfig& config, std::uint64_t seed,
                                     std::uint64_t offset, const std::string& prefix = "") {
  if (config.has(prefix + "data")) {
    return mrb::read_csv(config.require_string(prefix + "data"));
  }
  const std::string generator = config.get_string("generator", "two_moons");
  const auto n = config.get_int(prefix + "n", prefix.empty() ? 200 : 500, 2, 1'000'000);
  const double noise = config.get_double_in("noise", 0.1, 0.0, 100.0);
  const auto classes = config.get_int("classes", 3, 2, 100);
  try {
    return mrb::generate_dataset(generator, static_cast<std::size_t>(n), noise,
                                 static_cast<int>(classes), seed + offset);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("generator", e.what());
  }
}

int cmd_gen_data(const Invocation& inv) {
  ExperimentConfig config = load_config(inv);
  const auto seed = config.get_seed("seed", 0);
  const mrb::LabeledDataset data = load_or_generate(config, seed, 0);
  const std::string name = config.get_string("path", config.resolved().at("generator") + ".csv");
  config.reject_unused();
  const fs::path path = fs::path(name).is_absolute() ? fs::path(name) : output_dir(inv) / name;
  mrb::write_csv(path.string(), data);
  std::cout << path.string() << '\n';
  return 0;
}

int cmd_exact_boost(const Invocation& inv) {
  ExperimentConfig config = load_config(inv);
  const std::string instance = config.get_string("instance", "fixture");
  const auto seed = config.get_seed("seed", 0);
  const auto rounds = static_cast<std::size_t>(config.get_int("rounds", 64, 1, 10'000'000));

  std::optional<mrb::FiniteHypothesisClass> hypotheses;
  std::optional<mrb::LabeledDataset> data;
  std::optional<mrb::PerturbationModel> perturbations;
  if (instance == "fixture") {
    auto fx = mrb::interval_class_fixture(config.get_double_in("grid_step", 0.1, 1e-3, 0.1));
    hypotheses = std::move(fx.hypotheses);
    data = std::move(fx.dataset);
    perturbations = std::move(fx.perturbations);
  } else if (instance == "random") {
    const auto n = config.get_int("n", 6, 1, 10'000);
    const auto k = config.get_int("classes", 3, 2, 100);
    const auto h = config.get_int("hypotheses", 30, 1, 100'000);
    const auto g = config.get_int("grid_points", 5, 1, 10'000);
    auto ri = mrb::random_table_instance(n, static_cast<int>(k), h, g, seed);
    hypotheses = std::move(ri.hypotheses);
    data = std::move(ri.dataset);
    perturbations = std::move(ri.perturbations);
  } else if (instance == "stumps") {
    data = mrb::read_csv(config.require_string("data"));
    const double eps = config.get_double_in("epsilon", 0.1, 0.0, 1e6);
    const auto g = config.get_int("grid_points", 9, 1, 100'000);
    perturbations = mrb::PerturbationModel::sign_grid(eps, data->dim(), g);
    hypotheses = mrb::FiniteHypothesisClass::all_stumps(*data, *perturbations);
  } else {
    throw ConfigError("instance", "expected fixture, random or stumps, got '" + instance + "'");
  }

  mrb::MrBoostOptions options;
  if (config.has("eta")) options.eta = config.get_double_in("eta", 0.0, 0.0, 1e6);
  options.compute_lp = config.get_bool("compute_lp", true);
  options.lp_cap = static_cast<std::size_t>(
      config.get_int("lp_cap", static_cast<std::int64_t>(options.lp_cap), 1, 2'000'000'000));
  config.reject_unused();

  const mrb::MrBoostResult result =
      mrb::mrboost_run(*hypotheses, *data, *perturbations, rounds, options);
  const std::size_t entries =
      data->size() * static_cast<std::size_t>(data->num_classes() - 1) * perturbations->size();

  const fs::path dir = output_dir(inv);
  {
    std::ofstream csv(dir / "rounds.csv");
    csv << "t,min_robust_margin,clean_acc,adv_acc,ne_gap\n";
    for (const mrb::RoundMetrics& r : result.rounds) {
      csv << r.round << ',' << fmt(r.min_robust_margin) << ',' << fmt(r.clean_accuracy) << ','
          << fmt(r.adversarial_accuracy) << ',' << fmt(r.ne_gap) << '\n';
    }
  }
  json summary;
  summary["command"] = "exact-boost";
  summary["config"] = config_echo(config);
  summary["seed"] = seed;
  summary["eta"] = result.eta;
  summary["num_hypotheses"] = hypotheses->size();
  summary["num_entries"] = entries;
  summary["xi_finite"] = mrb::xi_finite(entries, rounds);
  summary["certificate"] = {{"lower", result.certificate.lower},
                            {"upper", result.certificate.upper},
                            {"gap", result.certificate.gap},
                            {"lp_value", result.certificate.lp_value
                                             ? json(*result.certificate.lp_value)
                                             : json(nullptr)}};
  summary["final"] = {{"min_robust_margin", result.final_report.min_robust_margin},
                      {"clean_accuracy", nullable(result.final_report.clean_accuracy)},
                      {"adversarial_accuracy", result.final_report.adversarial_accuracy}};
  summary["chosen"] = result.chosen;
  write_json(dir / "summary.json", summary);
  return 0;
}

int cmd_wl_check(const Invocation& inv) {
  ExperimentConfig config = load_config(inv);
  const double step = config.get_double_in("grid_step", 0.1, 1e-3, 0.1);
  config.reject_unused();
  const auto fx = mrb::interval_class_fixture(step);
  const auto table = mrb::tabulate(fx.hypotheses, fx.dataset, fx.perturbations);
  const auto mr = mrb::wl_mrboost_value(table, fx.dataset, fx.perturbations);
  const auto rb = mrb::wl_robboost_value(table, fx.dataset);
  auto cert = [](const mrb::WlCertificate& c) {
    json j{{"condition", mrb::to_string(c.condition)}, {"gamma", c.gamma},
           {"holds", c.gamma > 0.0}};
    j["witness_hypothesis"] =
        c.witness_hypothesis ? json(*c.witness_hypothesis) : json(nullptr);
    return j;
  };
  json out{{"command", "wl-check"}, {"config", config_echo(config)}, {"seed", 0}};
  out["mrboost"] = cert(mr);
  out["robboost"] = cert(rb);
  write_json(output_dir(inv) / "wl.json", out);
  std::cout << "mrboost gamma " << fmt(mr.gamma) << ", robboost gamma " << fmt(rb.gamma) << '\n';
  return 0;
}

int cmd_regret_check(const Invocation& inv) {
  ExperimentConfig config = load_config(inv);
  const auto actions = static_cast<std::size_t>(config.get_int("actions", 16, 1, 1'000'000));
  const auto rounds = static_cast<std::size_t>(config.get_int("rounds", 512, 1, 10'000'000));
  const double b = config.get_double_in("bound", 1.0, 1e-12, 1e12);
  const double eta = config.get_double_in(
      "eta", 1.0 / (2.0 * b * std::sqrt(static_cast<double>(rounds))), 0.0, 1e12);
  const std::string sequence = config.get_string("sequence", "random");
  const auto seed = config.get_seed("seed", 0);
  config.reject_unused();

  mrb::RegretReport report;
  if (sequence == "random") {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-b, b);
    std::vector<mrb::Vector> losses(rounds, mrb::Vector(actions));
    for (auto& f : losses) {
      for (double& v : f) v = dist(rng);
    }
    report = mrb::exp_weights_regret_harness(losses, eta, b);
  } else if (sequence == "adversarial") {
    // Charge +B to the learner's heaviest action and -B elsewhere.
    auto oracle = [b](std::size_t, std::span<const double> p) {
      const auto top = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
      mrb::Vector f(p.size(), -b);
      f[top] = b;
      return f;
    };
    report = mrb::exp_weights_regret_harness(oracle, actions, rounds, eta, b);
  } else {
    throw ConfigError("sequence", "expected random or adversarial, got '" + sequence + "'");
  }
  if (!report.eta_within_guarantee) {
    std::cerr << "mrboost: warning: eta exceeds 1/(2B sqrt(T)); the bound is not guaranteed\n";
  }
  json out{{"command", "regret-check"},
           {"config", config_echo(config)},
           {"seed", seed},
           {"realized", report.realized},
           {"bound", report.bound},
           {"eta_within_guarantee", report.eta_within_guarantee},
           {"within_bound", report.realized <= report.bound}};
  write_json(output_dir(inv) / "regret.json", out);
  std::cout << "realized " << fmt(report.realized) << " bound " << fmt(report.bound) << '\n';
  return 0;
}

struct NnSetup {
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  std::size_t rounds = 1;
  mrb::SgdConfig sgd;
  mrb::AttackConfig attack;
  mrb::AttackConfig eval_attack;
  std::vector<std::size_t> hidden;
};

NnSetup read_nn_setup(ExperimentConfig& config) {
  NnSetup s;
  s.seed = config.get_seed("seed", 0);
  s.epsilon = config.get_double_in("epsilon", 0.1, 0.0, 1e6);
  s.rounds = static_cast<std::size_t>(config.get_int("rounds", 3, 1, 1000));
  s.sgd.step_size = config.get_double_in("sgd_step", 0.05, 1e-12, 1e6);
  s.sgd.iterations = static_cast<std::size_t>(config.get_int("sgd_iterations", 2000, 0, 100'000'000));
  s.sgd.batch_size = static_cast<std::size_t>(config.get_int("batch_size", 64, 1, 1'000'000));
  s.sgd.momentum = config.get_double_in("momentum", 0.0, 0.0, 0.999999);
  s.sgd.weight_decay = config.get_double_in("weight_decay", 0.0, 0.0, 1e6);
  s.sgd.seed = s.seed;
  s.hidden = config.get_sizes("hidden", {64, 64});
  s.attack = mrb::AttackConfig::pgd_train(s.epsilon, s.seed);
  s.attack.steps = static_cast<std::size_t>(config.get_int("attack_steps", 10, 1, 100'000));
  s.attack.step_size = config.get_double_in("attack_step_size", s.attack.step_size, 1e-12, 1e6);
  s.eval_attack = mrb::AttackConfig::pgd_eval(s.epsilon, s.seed + 1);
  s.eval_attack.steps = static_cast<std::size_t>(config.get_int("eval_steps", 20, 1, 100'000));
  return s;
}

void write_iterations(const fs::path& dir, const std::vector<mrb::NnBoostIteration>& its) {
  std::ofstream csv(dir / "iterations.csv");
  csv << "t,train_loss,clean_acc,adv_acc\n";
  for (const auto& it : its) {
    csv << it.t << ',' << fmt(it.train_loss) << ',' << fmt(it.clean_accuracy) << ','
        << fmt(it.robust_accuracy) << '\n';
  }
}

void write_members(const fs::path& dir, const mrb::ScoreEnsemble& ensemble) {
  for (std::size_t t = 0; t < ensemble.size(); ++t) {
    mrb::save_checkpoint((dir / ("member_" + std::to_string(t + 1) + ".txt")).string(),
                         ensemble.member(t));
  }
}

json iterations_json(const std::vector<mrb::NnBoostIteration>& its) {
  json rows = json::array();
  for (const auto& it : its) {
    rows.push_back({{"t", it.t},
                    {"train_loss", it.train_loss},
                    {"clean", it.clean_accuracy},
                    {"adv", it.robust_accuracy}});
  }
  return rows;
}

int cmd_nn_boost(const Invocation& inv) {
  ExperimentConfig config = load_config(inv);
  NnSetup s = read_nn_setup(config);
  const mrb::LabeledDataset train = load_or_generate(config, s.seed, 0);
  const mrb::LabeledDataset test = load_or_generate(config, s.seed, 7919, "test_");
  mrb::NnBoostOptions options;
  try {
    options.sampler = mrb::parse_sampler_kind(config.get_string("sampler", "all"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("sampler", e.what());
  }
  try {
    options.init = mrb::parse_init_kind(config.get_string("init", "per"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("init", e.what());
  }
  options.hidden = s.hidden;
  options.eta = config.get_double_in("eta", 1.0, 0.0, 1e6);
  options.pool_random = static_cast<std::size_t>(config.get_int("pool_random", 8, 0, 10'000));
  options.eval_data = &test;
  options.eval_attack = s.eval_attack;
  config.reject_unused();

  const auto result = mrb::mrboost_nn_run(
      train, mrb::PerturbationModel::continuous(s.epsilon), s.rounds, s.sgd, s.attack, options);
  const fs::path dir = output_dir(inv);
  write_iterations(dir, result.iterations);
  write_members(dir, result.ensemble);
  write_json(dir / "summary.json", {{"command", "nn-boost"},
                                    {"config", config_echo(config)},
                                    {"seed", s.seed},
                                    {"iterations", iterations_json(result.iterations)}});
  return 0;
}

int cmd_robboost(const Invocation& inv) {
  ExperimentConfig config = load_config(inv);
  NnSetup s = read_nn_setup(config);
  const mrb::LabeledDataset train = load_or_generate(config, s.seed, 0);
  const mrb::LabeledDataset test = load_or_generate(config, s.seed, 7919, "test_");
  mrb::RobBoostOptions options;
  try {
    options.init = mrb::parse_init_kind(config.get_string("init", "rnd"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("init", e.what());
  }
  options.individual = config.get_bool("individual", false);
  config.reject_unused();

  const auto sizes = mrb::layer_sizes_for(train, s.hidden);
  const mrb::ScoreEnsemble ensemble =
      mrb::robboost_greedy(train, sizes, s.rounds, s.sgd, s.attack, options);
  std::vector<mrb::NnBoostIteration> its;
  for (std::size_t t = 1; t <= ensemble.size(); ++t) {
    mrb::ModelRefs prefix;
    for (std::size_t j = 0; j < t; ++j) prefix.push_back(&ensemble.member(j));
    const auto e = mrb::evaluate_robust_accuracy(prefix, test, s.eval_attack);
    its.push_back({t, 0.0, e.clean_accuracy, e.robust_accuracy});
  }
  const fs::path dir = output_dir(inv);
  write_iterations(dir, its);
  write_members(dir, ensemble);
  write_json(dir / "summary.json", {{"command", "robboost"},
                                    {"config", config_echo(config)},
                                    {"seed", s.seed},
                                    {"iterations", iterations_json(its)}});
  return 0;
}

int cmd_attack_eval(const Invocation& inv) {
  ExperimentConfig config = load_config(inv);
  const std::string models_text = config.require_string("models");
  const auto seed = config.get_seed("seed", 0);
  const double eps = config.get_double_in("epsilon", 0.1, 0.0, 1e6);
  const auto steps = static_cast<std::size_t>(config.get_int("steps", 20, 1, 100'000));
  const double weight = config.get_double_in("randomized_weight", 0.5, 0.0, 1.0);
  const mrb::LabeledDataset data = load_or_generate(config, seed, 7919, "test_");
  config.reject_unused();

  std::vector<mrb::MlpParams> models;
  std::istringstream list(models_text);
  for (std::string path; std::getline(list, path, ',');) models.push_back(mrb::load_checkpoint(path));
  mrb::ModelRefs refs;
  for (const auto& m : models) refs.push_back(&m);

  mrb::AttackConfig pgd = mrb::AttackConfig::pgd_eval(eps, seed);
  pgd.steps = steps;
  mrb::AttackConfig fgsm = pgd;
  fgsm.steps = 1;
  fgsm.step_size = eps > 0.0 ? eps : 1e-3;
  fgsm.random_start = false;

  const auto pgd_eval = mrb::evaluate_robust_accuracy(refs, data, pgd);
  const auto fgsm_eval = mrb::evaluate_robust_accuracy(refs, data, fgsm);
  json acc{{"clean", pgd_eval.clean_accuracy},
           {"fgsm", fgsm_eval.robust_accuracy},
           {"pgd", pgd_eval.robust_accuracy}};
  if (models.size() == 2) {
    const mrb::RandomizedEnsemble ens{models[0], models[1], weight};
    acc["randomized_logit"] =
        mrb::evaluate_robust_accuracy(ens, data, pgd, mrb::AggregationLevel::logit).robust_accuracy;
    acc["randomized_probability"] =
        mrb::evaluate_robust_accuracy(ens, data, pgd, mrb::AggregationLevel::probability)
            .robust_accuracy;
  }
  const fs::path dir = output_dir(inv);
  {
    std::ofstream csv(dir / "per_sample.csv");
    csv << "index,label,pgd_ce,pgd_error\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
      csv << i << ',' << data.y(i) << ',' << fmt(pgd_eval.per_sample_loss[i]) << ','
          << fmt(pgd_eval.per_sample_error[i]) << '\n';
    }
  }
  write_json(dir / "attack.json", {{"command", "attack-eval"},
                                   {"config", config_echo(config)},
                                   {"seed", seed},
                                   {"accuracy", acc}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Margin boosting for adversarially robust ensembles"};
  app.require_subcommand(1);
  Invocation inv;

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Invocation&);
  };
  const std::vector<Command> commands{
      {"gen-data", "Generate a synthetic dataset as CSV", cmd_gen_data},
      {"exact-boost", "Run exponential weights vs best response on a finite instance",
       cmd_exact_boost},
      {"nn-boost", "Boost score networks with the margin cross-entropy loss", cmd_nn_boost},
      {"wl-check", "Certify both weak-learning conditions on the interval fixture",
       cmd_wl_check},
      {"regret-check", "Compare exponential-weights regret with its bound", cmd_regret_check},
      {"attack-eval", "Evaluate saved networks under FGSM and PGD", cmd_attack_eval},
      {"robboost", "Greedy stagewise robust boosting baseline", cmd_robboost},
  };
  std::vector<std::pair<CLI::App*, int (*)(const Invocation&)>> subs;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("-c,--config", inv.config_path, "key=value configuration file");
    sub->add_option("-o,--out", inv.output_dir,
                    std::string("Output directory (default $") + kOutputEnv + " or .)");
    sub->add_option("overrides", inv.overrides, "key=value overrides");
    subs.emplace_back(sub, c.run);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "mrboost: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    for (const auto& [sub, run] : subs) {
      if (sub->parsed()) return run(inv);
    }
  } catch (const ConfigError& e) {
    std::cerr << "mrboost: invalid config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "mrboost: error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
