// Copyright 2026 The sqlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sqlab/analysts/analysts.hpp"
#include "sqlab/core/csv.hpp"
#include "sqlab/core/error.hpp"
#include "sqlab/harness/experiment.hpp"
#include "sqlab/mechanisms/oracle.hpp"
#include "sqlab/privacy/privacy.hpp"
#include "sqlab/verify/moments.hpp"
#include "sqlab/verify/montecarlo.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCheckFailed = 2;
constexpr int kExitInternal = 3;

struct GlobalFlags {
  std::uint64_t seed = 20260810;
  std::size_t trials = 0;  // 0 = subcommand default
  std::string out;
  std::string format = "csv";
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

std::string render_table(const Table& table, const std::string& format) {
  if (format == "json") {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& row : table.rows) {
      nlohmann::json obj;
      for (std::size_t i = 0; i < table.header.size() && i < row.size(); ++i) {
        obj[table.header[i]] = row[i];
      }
      out.push_back(std::move(obj));
    }
    return out.dump(2) + "\n";
  }
  std::ostringstream out;
  sqlab::write_csv_row(out, table.header);
  for (const auto& row : table.rows) sqlab::write_csv_row(out, row);
  return out.str();
}

void emit(const GlobalFlags& flags, const Table& table) {
  const std::string content = render_table(table, flags.format);
  if (flags.out.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream file(flags.out, std::ios::binary | std::ios::trunc);
  if (!file) throw sqlab::Error("cannot write " + flags.out);
  file << content;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stod(item));
  return out;
}

// ---------------------------------------------------------------------------
// sizes

int cmd_sizes(const GlobalFlags& flags, const std::string& taus,
              const std::string& betas, std::uint64_t m, unsigned r,
              double eps, double delta, double logX, double C) {
  using sqlab::privacy::SizingInputs;
  using sqlab::privacy::SizingRule;
  const std::vector<SizingRule> rules = {
      SizingRule::kLaplacePure,           SizingRule::kLaplaceApprox,
      SizingRule::kLaplaceTransferPure,   SizingRule::kLaplaceTransferApprox,
      SizingRule::kPmwPure,               SizingRule::kPmwApprox,
      SizingRule::kPmwTransferPure,       SizingRule::kPmwTransferApprox,
      SizingRule::kSparsePure,            SizingRule::kSparseApprox,
      SizingRule::kEffectiveRoundsTransfer,
      SizingRule::kEffectiveRoundsGate,
  };
  Table table;
  table.header = {"rule", "tau", "beta", "C", "required_n"};
  for (const double tau : parse_list(taus)) {
    for (const double beta : parse_list(betas)) {
      SizingInputs in;
      in.tau = tau;
      in.beta = beta;
      if (m > 0) in.m = m;
      if (r > 0) in.r = r;
      if (eps > 0) in.epsilon = eps;
      if (delta > 0) in.delta = delta;
      if (logX > 0) in.log_universe = logX;
      for (const auto rule : rules) {
        try {
          const std::uint64_t n =
              sqlab::privacy::required_sample_size(rule, in, C);
          table.add({sqlab::privacy::sizing_rule_name(rule),
                     sqlab::csv_double(tau), sqlab::csv_double(beta),
                     sqlab::csv_double(C), std::to_string(n)});
        } catch (const sqlab::MissingParameter&) {
          // Rule not applicable with the supplied parameters.
        }
      }
    }
  }
  emit(flags, table);
  if (table.rows.empty()) {
    std::cerr << "no sizing rule applicable; supply --m/--r/--eps/--delta/--logX"
              << std::endl;
    return kExitUsage;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify subcommands: each emits rows
//   (check, parameters, lhs, rhs_or_bound, holds, trials, violations)
// and exits 2 when a named check fails.

Table verify_table() {
  Table table;
  table.header = {"check", "parameters", "lhs",
                  "rhs_or_bound", "holds", "trials", "violations"};
  return table;
}

int cmd_verify_moments(const GlobalFlags& flags) {
  Table table = verify_table();
  bool ok = true;

  const std::vector<sqlab::verify::MomentSpec> specs = {
      {10, 0.5, 2}, {100, 0.1, 2}, {50, 0.9, 3}, {200, 0.25, 5}, {1000, 0.5, 1},
  };
  for (const auto& spec : specs) {
    const double got = sqlab::verify::binomial_moment(spec);
    double expected = got;
    if (spec.k == 1) {
      expected = spec.p;
    } else if (spec.k == 2) {
      expected =
          spec.p * spec.p + spec.p * (1 - spec.p) / static_cast<double>(spec.n);
    }
    const bool holds = std::abs(got - expected) <=
                       1e-12 * std::max(1.0, std::abs(expected));
    ok = ok && holds;
    std::ostringstream params;
    params << "n=" << spec.n << " p=" << spec.p << " k=" << spec.k;
    table.add({"binomial-moment", params.str(), sqlab::csv_double(got),
               sqlab::csv_double(expected), holds ? "1" : "0", "0", "0"});
  }

  const std::size_t trials = flags.trials ? flags.trials : 20000;
  const auto domination = sqlab::verify::check_bernoulli_domination(
      20, 0.5, 4, trials, flags.seed);
  ok = ok && domination.holds;
  table.add({"bernoulli-domination", "n=20 p=0.5 k=4 law=uniform",
             sqlab::csv_double(domination.estimate),
             sqlab::csv_double(domination.moment_bound),
             domination.holds ? "1" : "0", std::to_string(domination.trials),
             "0"});

  emit(flags, table);
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_verify_bounds(const GlobalFlags& flags) {
  Table table = verify_table();
  bool ok = true;

  // Moment-cap sweep. The closed form fails where k is small against n p
  // (the inequality itself is false there; exact arithmetic confirms), so
  // the honest output reports the failing cell count.
  std::size_t violations = 0;
  std::size_t cells = 0;
  for (std::size_t n = 10; n <= 200; n += 10) {
    for (unsigned k = 1; k <= 10; ++k) {
      for (const double p : {0.0, 0.01, 0.1, 0.5, 0.9, 1.0}) {
        const auto check = sqlab::verify::check_moment_upper_bound(n, p, k);
        ++cells;
        if (!check.holds) ++violations;
      }
    }
  }
  ok = ok && violations == 0;
  table.add({"moment-upper-bound-grid",
             "n=10..200 k=1..10 p in {0,0.01,0.1,0.5,0.9,1}",
             std::to_string(cells), "grid holds everywhere",
             violations == 0 ? "1" : "0", std::to_string(cells),
             std::to_string(violations)});

  // Chernoff versus the exact binomial tail.
  const double chernoff = sqlab::verify::chernoff_mult_bound(100, 0.5, 0.2);
  const double tail = sqlab::verify::binomial_upper_tail(100, 0.5, 60);
  const bool chernoff_ok = chernoff >= tail;
  ok = ok && chernoff_ok;
  table.add({"chernoff-vs-exact-tail", "n=100 p=0.5 gamma=0.2",
             sqlab::csv_double(tail), sqlab::csv_double(chernoff),
             chernoff_ok ? "1" : "0", "0", "0"});

  // Moment-based tail bound dominates e^{eps k} times the exact tail.
  const auto markov =
      sqlab::verify::markov_moment_tail(1000, 0.1, 20, 0.05, 0.0, 0.1);
  const double exact = sqlab::verify::binomial_upper_tail(1000, 0.1, 200);
  const bool markov_ok =
      markov.markov_bound >= std::exp(0.05 * 20) * exact;
  ok = ok && markov_ok;
  table.add({"markov-moment-tail", "n=1000 p=0.1 k=20 eps=0.05 tau=0.1",
             sqlab::csv_double(std::exp(0.05 * 20) * exact),
             sqlab::csv_double(markov.markov_bound), markov_ok ? "1" : "0",
             "0", "0"});

  // McDiarmid evaluator scale invariance.
  const bool mcd_ok =
      std::abs(sqlab::verify::mcdiarmid_bound(50, 0.2, 0.3) -
               sqlab::verify::mcdiarmid_bound(50, 0.4, 0.6)) <= 1e-12;
  ok = ok && mcd_ok;
  table.add({"mcdiarmid-scale-invariance", "n=50 (c,a) vs (2c,2a)",
             sqlab::csv_double(sqlab::verify::mcdiarmid_bound(50, 0.2, 0.3)),
             sqlab::csv_double(sqlab::verify::mcdiarmid_bound(50, 0.4, 0.6)),
             mcd_ok ? "1" : "0", "0", "0"});

  emit(flags, table);
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_verify_transfer(const GlobalFlags& flags) {
  Table table = verify_table();
  const std::size_t trials = flags.trials ? flags.trials : 200;
  bool ok = true;

  // Non-adaptive baseline: naive answers hold the fixed-query rate.
  {
    sqlab::Population pop =
        sqlab::Population::uniform(sqlab::Universe::indexed(64));
    sqlab::mechanisms::OracleConfig cfg;
    cfg.mechanism = sqlab::mechanisms::Mechanism::kNaive;
    cfg.tau = 0.1;
    cfg.m = 20;
    sqlab::analysts::StrategySpec strategy;
    strategy.kind = sqlab::analysts::StrategySpec::Kind::kNonAdaptiveRandom;
    strategy.m = 10;
    const double bound = sqlab::verify::hoeffding_bound(300, cfg.tau);
    const auto report = sqlab::verify::transfer_check(cfg, strategy, pop, 300,
                                                      bound, trials, flags.seed);
    ok = ok && report.holds;
    table.add({"transfer-naive-nonadaptive", "n=300 tau=0.1 m=10",
               sqlab::csv_double(report.stats.violation_rate),
               sqlab::csv_double(bound), report.holds ? "1" : "0",
               std::to_string(trials),
               std::to_string(report.stats.violations)});
  }

  // Calibrated Laplace holds the transfer bound against the probe; the
  // naive oracle at the same n does not.
  {
    const double tau = 0.2, beta = 0.05;
    const std::size_t n = static_cast<std::size_t>(
        std::ceil(12.0 * std::log(4.0 / beta) / (tau * tau)));
    sqlab::Population pop =
        sqlab::Population::uniform(sqlab::Universe::indexed(4096));
    sqlab::analysts::StrategySpec strategy;
    strategy.kind = sqlab::analysts::StrategySpec::Kind::kReconstructionProbe;
    strategy.m = 4000;

    sqlab::mechanisms::OracleConfig laplace;
    laplace.mechanism = sqlab::mechanisms::Mechanism::kLaplace;
    laplace.tau = tau;
    laplace.beta = beta;
    laplace.m = strategy.m + 1;
    laplace.epsilon = sqlab::privacy::calibrate_epsilon_pure(tau, beta, n);
    const std::size_t dp_trials = std::min<std::size_t>(trials, 200);
    const auto report = sqlab::verify::transfer_check(laplace, strategy, pop,
                                                      n, beta, dp_trials,
                                                      flags.seed);
    ok = ok && report.holds;
    table.add({"transfer-laplace-probe", "n=1315 tau=0.2 beta=0.05 eps=0.1",
               sqlab::csv_double(report.stats.violation_rate),
               sqlab::csv_double(beta), report.holds ? "1" : "0",
               std::to_string(dp_trials),
               std::to_string(report.stats.violations)});

    sqlab::mechanisms::OracleConfig naive;
    naive.mechanism = sqlab::mechanisms::Mechanism::kNaive;
    naive.tau = tau;
    naive.m = strategy.m + 1;
    const std::size_t small_trials = std::min<std::size_t>(trials, 40);
    const auto stats = sqlab::verify::monitor_final_query(
        naive, strategy, pop, n, tau, small_trials, flags.seed + 1);
    const bool overfits = stats.violation_rate >= 0.5;
    ok = ok && overfits;
    table.add({"transfer-naive-probe-negative-control", "n=1315 tau=0.2",
               sqlab::csv_double(stats.violation_rate), ">= 0.5",
               overfits ? "1" : "0", std::to_string(small_trials),
               std::to_string(stats.violations)});
  }

  emit(flags, table);
  return ok ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------
// attack

int cmd_attack(const GlobalFlags& flags, const std::string& oracle,
               std::size_t n, std::uint64_t universe_size,
               std::size_t m_probe, double tau, double beta, double C) {
  using sqlab::mechanisms::Mechanism;
  sqlab::mechanisms::OracleConfig cfg;
  cfg.tau = tau;
  cfg.beta = beta;
  cfg.m = m_probe + 1;
  std::size_t dataset_n = n;
  sqlab::privacy::SizingInputs sizing;
  sizing.tau = tau;
  sizing.beta = beta;
  sizing.m = m_probe + 1;
  if (oracle == "naive") {
    cfg.mechanism = Mechanism::kNaive;
  } else if (oracle == "laplace") {
    cfg.mechanism = Mechanism::kLaplace;
    cfg.epsilon = tau / 2.0;
    dataset_n = sqlab::privacy::required_sample_size(
        sqlab::privacy::SizingRule::kLaplaceTransferPure, sizing, C);
  } else if (oracle == "pmw") {
    cfg.mechanism = Mechanism::kPmw;
    cfg.epsilon = tau / 2.0;
    sizing.log_universe = std::log(static_cast<double>(universe_size));
    dataset_n = sqlab::privacy::required_sample_size(
        sqlab::privacy::SizingRule::kPmwTransferPure, sizing, C);
  } else {
    std::cerr << "unknown oracle: " << oracle << std::endl;
    return kExitUsage;
  }
  const std::size_t trials = flags.trials ? flags.trials : 20;
  sqlab::Population pop =
      sqlab::Population::uniform(sqlab::Universe::indexed(universe_size));
  // DP oracles are usually sized past the |X| >= 2n regime; target half
  // the universe there so the probe still runs as a stress workload.
  const std::size_t top_count =
      2 * dataset_n <= universe_size ? 0 : universe_size / 2;

  Table table;
  table.header = {"trial", "gap_reported", "gap_empirical", "reported",
                  "true_value"};
  double mean_gap = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    sqlab::Dataset data = sqlab::sample_dataset(
        pop, dataset_n, sqlab::derive_seed(flags.seed, 3 * t));
    auto session = sqlab::mechanisms::open_session(
        cfg, data, sqlab::derive_seed(flags.seed, 3 * t + 1));
    const auto result = sqlab::analysts::reconstruction_probe(
        *session, pop, m_probe, sqlab::derive_seed(flags.seed, 3 * t + 2),
        top_count);
    mean_gap += result.gap_reported;
    table.add({std::to_string(t), sqlab::csv_double(result.gap_reported),
               sqlab::csv_double(result.gap_empirical),
               sqlab::csv_double(result.reported),
               sqlab::csv_double(result.true_value)});
  }
  mean_gap /= static_cast<double>(trials);
  emit(flags, table);
  std::cerr << "attack " << oracle << ": n=" << dataset_n << " |X|="
            << universe_size << " m_probe=" << m_probe
            << " mean reported-vs-true gap = " << mean_gap << std::endl;
  return kExitOk;
}

// ---------------------------------------------------------------------------
// demo appendix-a

int cmd_demo_appendix_a(const GlobalFlags& flags, unsigned d, std::size_t n) {
  const std::size_t trials = flags.trials ? flags.trials : 20;
  sqlab::Population pop = sqlab::Population::gaussian_product(d);
  sqlab::mechanisms::OracleConfig cfg;
  cfg.mechanism = sqlab::mechanisms::Mechanism::kNaive;
  cfg.m = static_cast<std::uint64_t>(d) + 1;

  Table table;
  table.header = {"trial", "reported_unrescaled", "true_mc", "true_mc_se"};
  double mean_reported = 0.0;
  double pooled_true = 0.0;
  double pooled_var = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    sqlab::Dataset data =
        sqlab::sample_dataset(pop, n, sqlab::derive_seed(flags.seed, 3 * t));
    auto session = sqlab::mechanisms::open_session(
        cfg, data, sqlab::derive_seed(flags.seed, 3 * t + 1));
    const auto result = sqlab::analysts::sign_aggregation_attack(
        *session, pop, d, 500, sqlab::derive_seed(flags.seed, 3 * t + 2));
    mean_reported += result.reported_unrescaled;
    pooled_true += result.true_estimate;
    pooled_var += result.true_std_error * result.true_std_error;
    table.add({std::to_string(t),
               sqlab::csv_double(result.reported_unrescaled),
               sqlab::csv_double(result.true_estimate),
               sqlab::csv_double(result.true_std_error)});
  }
  mean_reported /= static_cast<double>(trials);
  pooled_true /= static_cast<double>(trials);
  const double pooled_se = std::sqrt(pooled_var) / static_cast<double>(trials);
  const double expected = std::sqrt(2.0 * static_cast<double>(d) /
                                    (M_PI * static_cast<double>(n)));
  emit(flags, table);
  std::cerr << "appendix-a: mean reported " << mean_reported << ", expected "
            << expected << ", pooled true " << pooled_true << " +- "
            << pooled_se << std::endl;
  const bool reported_ok = std::abs(mean_reported - expected) <= 0.1 * expected;
  const bool true_ok = std::abs(pooled_true) <= 3.0 * pooled_se;
  if (!reported_ok || !true_ok) {
    std::cerr << "appendix-a check FAILED (reported within 10%: "
              << reported_ok << ", true consistent with 0: " << true_ok << ")"
              << std::endl;
    return kExitCheckFailed;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sqlab: adaptively chosen statistical queries, answered "
               "privately and audited numerically"};
  app.require_subcommand(1);
  GlobalFlags flags;
  app.add_option("--seed", flags.seed, "master seed");
  app.add_option("--trials", flags.trials, "trial count override");
  app.add_option("--out", flags.out, "output path (default: stdout)");
  app.add_option("--format", flags.format, "csv|json (csv default)")
      ->check(CLI::IsMember({"csv", "json"}));

  // run
  auto* run = app.add_subcommand("run", "run an experiment config");
  std::string config_path;
  run->add_option("config", config_path, "experiment config file")->required();

  // sizes
  auto* sizes = app.add_subcommand("sizes", "required sample sizes");
  std::string s_tau = "0.1", s_beta = "0.05";
  double s_eps = 0, s_delta = 0, s_logX = 0,
         s_C = sqlab::privacy::kDefaultSizingConstant;
  std::uint64_t s_m = 0;
  unsigned s_r = 0;
  sizes->add_option("--tau", s_tau, "tolerance (comma list for a grid)");
  sizes->add_option("--beta", s_beta, "failure probability (comma list)");
  sizes->add_option("--m", s_m, "query count");
  sizes->add_option("--r", s_r, "rounds / firings");
  sizes->add_option("--eps", s_eps, "privacy epsilon");
  sizes->add_option("--delta", s_delta, "privacy delta");
  sizes->add_option("--logX", s_logX, "log universe size");
  sizes->add_option("--C", s_C, "sizing constant");

  // verify
  auto* verify = app.add_subcommand("verify", "numeric verification suites");
  verify->require_subcommand(1);
  auto* verify_moments = verify->add_subcommand("moments", "moment oracles");
  auto* verify_bounds = verify->add_subcommand("bounds", "bound evaluators");
  auto* verify_transfer =
      verify->add_subcommand("transfer", "transfer-theorem Monte Carlo");

  // attack
  auto* attack = app.add_subcommand("attack", "reconstruction probe attack");
  std::string attack_oracle;
  attack->add_option("oracle", attack_oracle, "naive|laplace|pmw")->required();
  std::size_t a_n = 100, a_m = 4000;
  std::uint64_t a_X = 1024;
  double a_tau = 0.2, a_beta = 0.05,
         a_C = sqlab::privacy::kDefaultSizingConstant;
  attack->add_option("--n", a_n, "dataset size (naive oracle)");
  attack->add_option("--X", a_X, "universe size");
  attack->add_option("--m-probe", a_m, "probe query count");
  attack->add_option("--tau", a_tau, "tolerance");
  attack->add_option("--beta", a_beta, "failure probability");
  attack->add_option("--C", a_C, "sizing constant for DP oracles");

  // demo
  auto* demo = app.add_subcommand("demo", "built-in demonstrations");
  demo->require_subcommand(1);
  auto* appendix_a = demo->add_subcommand(
      "appendix-a", "overfitting a linear model on pure noise");
  unsigned d_dim = 10000;
  std::size_t d_n = 100;
  appendix_a->add_option("--d", d_dim, "attribute count");
  appendix_a->add_option("--n", d_n, "sample count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) {
      auto cfg = sqlab::harness::ExperimentConfig::from_file(config_path);
      if (flags.trials) cfg.trials = flags.trials;
      if (!flags.out.empty()) cfg.out = flags.out;
      if (app.count("--seed")) cfg.seed = flags.seed;
      const auto result = sqlab::harness::run_experiment(cfg);
      std::cerr << "wrote " << result.csv_path << " ("
                << result.rows.size() << " rows) and "
                << result.metadata_path << std::endl;
      return kExitOk;
    }
    if (*sizes) {
      return cmd_sizes(flags, s_tau, s_beta, s_m, s_r, s_eps, s_delta, s_logX,
                       s_C);
    }
    if (*verify_moments) return cmd_verify_moments(flags);
    if (*verify_bounds) return cmd_verify_bounds(flags);
    if (*verify_transfer) return cmd_verify_transfer(flags);
    if (*attack) {
      return cmd_attack(flags, attack_oracle, a_n, a_X, a_m, a_tau, a_beta,
                        a_C);
    }
    if (*appendix_a) return cmd_demo_appendix_a(flags, d_dim, d_n);
  } catch (const sqlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitUsage;
  } catch (const sqlab::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << std::endl;
    return kExitUsage;
  } catch (const sqlab::Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << std::endl;
    return kExitInternal;
  }
  return kExitUsage;
}
