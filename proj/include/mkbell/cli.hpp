// Command-line front end: maxbell, pmax, sweep, verify. run_cli takes the
// argument vector and the output streams so tests can drive it in-process;
// the binary in tools/ is a thin wrapper. Exit codes: 0 success, 1 runtime
// failure (non-convergence, tolerance breach, write failure), 2 bad flags.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mkbell/channels_states.hpp"
#include "mkbell/optimizer.hpp"
#include "mkbell/threshold.hpp"
#include "mkbell/verify.hpp"

namespace mkbell {

namespace detail {

// Fixed nine decimal places; every tolerance in the project is coarser.
inline std::string fixed9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

inline std::optional<MaybeNoise> parse_channel(const std::string& name) {
  if (name == "none") return MaybeNoise(std::nullopt);
  if (name == "depolarizing") return MaybeNoise(NoiseSpec(Channel::depolarizing, 0.0));
  if (name == "dephasing") return MaybeNoise(NoiseSpec(Channel::dephasing, 0.0));
  if (name == "dissipation") return MaybeNoise(NoiseSpec(Channel::dissipation, 0.0));
  return std::nullopt;
}

inline void print_report(std::ostream& out, int n, const MaybeNoise& noise, double p,
                         const OptimizationReport& report, std::uint64_t seed, bool as_json) {
  if (as_json) {
    nlohmann::ordered_json j;
    j["n"] = n;
    j["channel"] = channel_name(noise);
    j["p"] = p;
    j["max_bell"] = static_cast<double>(report.best_value);
    nlohmann::ordered_json settings = nlohmann::ordered_json::array();
    for (int i = 0; i < n; ++i) {
      nlohmann::ordered_json party;
      party["theta"] = report.best_settings.setting(i, 0).theta;
      party["theta_prime"] = report.best_settings.setting(i, 1).theta;
      party["phi"] = report.best_settings.setting(i, 0).phi;
      party["phi_prime"] = report.best_settings.setting(i, 1).phi;
      settings.push_back(std::move(party));
    }
    j["settings"] = std::move(settings);
    j["converged"] = report.converged;
    j["seed"] = seed;
    out << j.dump(2) << '\n';
    return;
  }
  out << "best value " << fixed9(static_cast<double>(report.best_value)) << '\n';
  out << "converged " << (report.converged ? "yes" : "no") << '\n';
  out << "starts used " << report.starts_used << '\n';
  out << "seed " << seed << '\n';
  for (int i = 0; i < n; ++i) {
    const auto& u = report.best_settings.setting(i, 0);
    const auto& q = report.best_settings.setting(i, 1);
    out << "party " << (i + 1) << " unprimed theta " << fixed9(u.theta) << " phi " << fixed9(u.phi)
        << '\n';
    out << "party " << (i + 1) << " primed theta " << fixed9(q.theta) << " phi " << fixed9(q.phi)
        << '\n';
  }
}

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mermin-Klyshko Bell values of decohered GHZ states"};
  app.require_subcommand(1);

  int n = 0;
  std::string channel;
  double p = -1.0;
  int starts = 64;
  std::uint64_t seed = 12345;
  bool as_json = false;
  double tol = 1e-4;
  double p_min = 0.0, p_max_arg = 1.0;
  int steps = 0;
  std::string out_path;
  int n_max = 5;
  int trials = 50;

  CLI::App* maxbell = app.add_subcommand("maxbell", "maximize the Bell value at one (channel, p)");
  maxbell->add_option("--n", n, "party count")->required();
  maxbell->add_option("--channel", channel, "depolarizing|dephasing|dissipation|none")->required();
  maxbell->add_option("--p", p, "degree of decoherence in [0,1]");
  maxbell->add_option("--starts", starts, "multistart count");
  maxbell->add_option("--seed", seed, "RNG seed");
  maxbell->add_flag("--json", as_json, "emit one JSON object instead of text");

  CLI::App* pmax = app.add_subcommand("pmax", "locate the violation threshold for a channel");
  pmax->add_option("--n", n, "party count")->required();
  pmax->add_option("--channel", channel, "depolarizing|dephasing|dissipation")->required();
  pmax->add_option("--tol", tol, "bisection tolerance (>= 1e-6)");
  pmax->add_option("--seed", seed, "RNG seed");

  CLI::App* sweep = app.add_subcommand("sweep", "write a CSV of max Bell values over a p range");
  sweep->add_option("--n", n, "party count")->required();
  sweep->add_option("--channel", channel, "depolarizing|dephasing|dissipation|none")->required();
  sweep->add_option("--p-min", p_min, "range start")->required();
  sweep->add_option("--p-max", p_max_arg, "range end")->required();
  sweep->add_option("--steps", steps, "row count, endpoints included")->required();
  sweep->add_option("--out", out_path, "output CSV path")->required();
  sweep->add_option("--starts", starts, "multistart count");
  sweep->add_option("--seed", seed, "RNG seed");

  CLI::App* verify = app.add_subcommand("verify", "audit closed-form vs dense evaluation paths");
  verify->add_option("--n-max", n_max, "largest party count audited");
  verify->add_option("--trials", trials, "random settings tables per configuration");
  verify->add_option("--seed", seed, "RNG seed");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("mkbell");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "mkbell: " << e.what() << '\n';
    return 2;
  }

  const auto fail_usage = [&err](const std::string& message) {
    err << "mkbell: " << message << '\n';
    return 2;
  };

  try {
    if (maxbell->parsed() || sweep->parsed() || pmax->parsed()) {
      if (n < 2 || n > dense_qubit_cap)
        return fail_usage("--n must lie in 2.." + std::to_string(dense_qubit_cap));
    }

    if (maxbell->parsed()) {
      auto noise = detail::parse_channel(channel);
      if (!noise) return fail_usage("unknown channel '" + channel + "'");
      if (*noise) {
        if (maxbell->count("--p") == 0) return fail_usage("--p is required unless --channel none");
        if (!(p >= 0.0 && p <= 1.0)) return fail_usage("--p must lie in [0,1]");
        (*noise)->p = p;
      } else if (maxbell->count("--p") != 0) {
        return fail_usage("--p has no meaning with --channel none");
      }
      if (starts < 1) return fail_usage("--starts must be >= 1");

      OptimizerConfig config;
      config.starts = starts;
      config.seed = seed;
      const OptimizationReport report = max_bell(n, *noise, config);
      detail::print_report(out, n, *noise, *noise ? p : 0.0, report, seed, as_json);
      return report.converged ? 0 : 1;
    }

    if (pmax->parsed()) {
      auto noise = detail::parse_channel(channel);
      if (!noise) return fail_usage("unknown channel '" + channel + "'");
      if (!*noise) return fail_usage("pmax needs a decoherence channel, not none");
      if (!(tol >= 1e-6)) return fail_usage("--tol must be >= 1e-6");

      ThresholdConfig config;
      config.optimizer.seed = seed;
      const ThresholdResult result = numeric_pmax(n, (*noise)->kind, tol, config);
      if (result.p_max) {
        out << "numeric p_max " << detail::fixed9(*result.p_max) << '\n';
        out << "bracket width " << detail::fixed9(result.bracket_width) << '\n';
        if (result.analytic_reference) {
          out << "analytic p_max " << detail::fixed9(*result.analytic_reference) << '\n';
          out << "difference " << detail::fixed9(*result.p_max - *result.analytic_reference) << '\n';
        } else {
          out << "analytic p_max not available\n";
        }
      } else {
        out << "no threshold found below cap " << result.cap << '\n';
        out << "analytic p_max not available\n";
      }
      return 0;
    }

    if (sweep->parsed()) {
      auto noise = detail::parse_channel(channel);
      if (!noise) return fail_usage("unknown channel '" + channel + "'");
      if (steps < 2) return fail_usage("--steps must be >= 2");
      if (!(p_min >= 0.0 && p_min <= p_max_arg && p_max_arg <= 1.0))
        return fail_usage("need 0 <= p-min <= p-max <= 1");
      if (starts < 1) return fail_usage("--starts must be >= 1");

      std::ofstream file(out_path, std::ios::binary);
      if (!file) {
        err << "mkbell: cannot open '" << out_path << "' for writing\n";
        return 1;
      }
      file << "channel,n,p,max_bell\n";
      bool all_converged = true;
      for (int i = 0; i < steps; ++i) {
        const double pv = p_min + (p_max_arg - p_min) * i / (steps - 1);
        MaybeNoise point = *noise;
        if (point) point->p = pv;
        OptimizerConfig config;
        config.starts = starts;
        config.seed = seed;
        const OptimizationReport report = max_bell(n, point, config);
        all_converged = all_converged && report.converged;
        file << channel_name(point) << ',' << n << ',' << detail::fixed9(pv) << ','
             << detail::fixed9(static_cast<double>(report.best_value)) << '\n';
      }
      file.flush();
      if (!file) {
        err << "mkbell: write to '" << out_path << "' failed\n";
        return 1;
      }
      if (!all_converged) {
        err << "mkbell: optimizer failed to converge for at least one row\n";
        return 1;
      }
      return 0;
    }

    if (verify->parsed()) {
      if (n_max < 2 || n_max > dense_qubit_cap)
        return fail_usage("--n-max must lie in 2.." + std::to_string(dense_qubit_cap));
      if (trials < 1) return fail_usage("--trials must be >= 1");

      VerifyOptions options;
      options.n_max = n_max;
      options.trials = trials;
      options.seed = seed;
      const VerifyReport report = run_verification(options);
      out << "max correlation deviation " << report.max_correlation_deviation << " (tolerance "
          << options.correlation_tol << ")\n";
      out << "max state deviation " << report.max_state_deviation << " (tolerance " << options.state_tol
          << ")\n";
      for (const auto& issue : report.issues)
        out << "breach: " << issue.what << " n=" << issue.n << " channel=" << issue.channel
            << " p=" << issue.p << " table_seed=" << issue.table_seed << " deviation=" << issue.deviation
            << '\n';
      out << (report.pass ? "PASS" : "FAIL") << '\n';
      return report.pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    err << "mkbell: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace mkbell
