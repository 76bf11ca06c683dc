#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ictmc/axioms.hpp"
#include "ictmc/core.hpp"
#include "ictmc/envelope.hpp"
#include "ictmc/errors.hpp"
#include "ictmc/io.hpp"
#include "ictmc/logarithm.hpp"
#include "ictmc/operators.hpp"
#include "ictmc/semigroup.hpp"

namespace ictmc::cli {

using json = nlohmann::json;

enum ExitCode : int { kOk = 0, kViolation = 1, kInputError = 2 };

struct Options {
  std::string model;
  std::string function;
  double time = 0.0;
  double tol = 1e-6;
  std::string bound = "upper";
  std::uint64_t seed = 0;
  std::size_t samples = kDefaultAxiomSamples;
  bool deep = false;
  bool pretty = false;
  std::vector<double> grid;
  double oracle_tol = 1e-6;
};

namespace detail {

inline json values_json(const Func& f) {
  return std::vector<double>(f.values().begin(), f.values().end());
}

inline json axiom_json(const AxiomReport& report) {
  json out = json::array();
  for (const auto& c : report.checks)
    out.push_back({{"id", c.id},
                   {"name", c.name},
                   {"passed", c.passed},
                   {"worst_violation", c.worst_violation}});
  return out;
}

inline void render_text(const json& j, std::ostream& out, const std::string& indent = "") {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_structured()) {
        out << indent << key << ":\n";
        render_text(value, out, indent + "  ");
      } else {
        out << indent << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump())
            << '\n';
      }
    }
  } else if (j.is_array()) {
    const bool flat = std::none_of(j.begin(), j.end(), [](const json& v) { return v.is_structured(); });
    if (flat) {
      out << indent << j.dump() << '\n';
      return;
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
      out << indent << "- [" << i << "]\n";
      render_text(j[i], out, indent + "  ");
    }
  } else {
    out << indent << j.dump() << '\n';
  }
}

inline void emit(const json& report, const Options& opt, std::ostream& out) {
  if (opt.pretty)
    render_text(report, out);
  else
    out << report.dump() << '\n';
}

inline json base_report(const std::string& command, json inputs) {
  return json{{"command", command}, {"inputs", std::move(inputs)}};
}

} // namespace detail

inline int cmd_expect(const Options& opt, std::ostream& out) {
  const RateOperator op = io::read_model_file(opt.model);
  const Func f = io::read_function_file(opt.function);
  if (!same_space(f.space_ptr(), op.space_ptr()))
    throw InputError("function and model have different state spaces");
  if (opt.bound != "upper" && opt.bound != "lower")
    throw InputError("--bound must be 'upper' or 'lower'");
  const ApproxResult r = opt.bound == "upper" ? exp_apply(op, opt.time, f, opt.tol)
                                              : lower_exp_apply(op, opt.time, f, opt.tol);
  json report = detail::base_report(
      "expect", {{"model", opt.model}, {"function", opt.function}, {"time", opt.time},
                 {"tol", opt.tol}, {"bound", opt.bound}});
  report["outputs"] = {{"space", op.space_ptr()->labels()}, {"values", detail::values_json(r.value)}};
  report["certificate"] = {{"error_bound", r.error_bound},
                           {"steps", r.steps},
                           {"delta", r.delta},
                           {"norm", op.norm()}};
  report["status"] = "ok";
  detail::emit(report, opt, out);
  return kOk;
}

inline int cmd_norm(const Options& opt, std::ostream& out) {
  const RateOperator op = io::read_model_file(opt.model);
  json report = detail::base_report("norm", {{"model", opt.model}});
  report["outputs"] = {{"norm", op.norm()},
                       {"attained_at", op.space_ptr()->label(op.norm_attained_at())},
                       {"attained_at_index", op.norm_attained_at()}};
  report["status"] = "ok";
  detail::emit(report, opt, out);
  return kOk;
}

inline int cmd_check(const Options& opt, std::ostream& out) {
  const io::ModelDocument doc = io::parse_model_document(io::read_json_file(opt.model));
  json report = detail::base_report(
      "check", {{"model", opt.model}, {"deep", opt.deep}, {"seed", opt.seed},
                {"samples", opt.samples}});
  std::vector<std::string> violations;

  std::optional<RateOperator> op;
  try {
    op.emplace(io::build_operator(doc, /*validate=*/false));
  } catch (const InputError& e) {
    // Box constraints are validated at construction; report them as violations.
    violations.push_back(std::string("B1 box constraints: ") + e.what());
  }

  json outputs = json::object();
  if (op) {
    const AxiomReport axioms = check_rate_axioms(*op, opt.samples, opt.seed);
    outputs["axioms"] = detail::axiom_json(axioms);
    for (const auto& c : axioms.checks)
      if (!c.passed)
        violations.push_back(c.id + " " + c.name);

    if (opt.deep && op->box()) {
      const BoxRateSpec& spec = *op->box();
      std::mt19937_64 rng(opt.seed);
      double worst = 0.0;
      for (int k = 0; k < 100; ++k) {
        const Func f = random_function(op->space_ptr(), rng);
        worst = std::max(worst, sup_norm(op->apply(f) - envelope_apply_bruteforce(spec, f)));
      }
      const double tol = 1e-12 * std::max(1.0, op->norm());
      const EnvelopeNormReport nr = envelope_norm_identity_check(spec);
      outputs["deep"] = {{"oracle_equivalence", {{"worst_difference", worst}, {"passed", worst <= tol}}},
                         {"norm_identity",
                          {{"envelope_norm", nr.envelope_norm},
                           {"vertex_max_norm", nr.vertex_max_norm},
                           {"vertex_matrices", nr.vertex_matrices},
                           {"passed", nr.passed}}}};
      if (worst > tol)
        violations.push_back("E1 greedy envelope differs from vertex enumeration");
      if (!nr.passed)
        violations.push_back("E2 envelope norm differs from vertex maximum");
    } else if (opt.deep) {
      outputs["deep"] = "not applicable to linear models";
    }
  }
  report["outputs"] = outputs;
  report["status"] = violations.empty() ? "ok" : "violation";
  if (!violations.empty())
    report["violations"] = violations;
  detail::emit(report, opt, out);
  return violations.empty() ? kOk : kViolation;
}

inline std::vector<double> grid_or_default(const Options& opt, const SemigroupOracle& oracle) {
  return opt.grid.empty() ? default_diagnostic_grid(oracle) : opt.grid;
}

inline int cmd_diagnose(const Options& opt, std::ostream& out) {
  const RateOperator op = io::read_model_file(opt.model);
  const SemigroupOracle oracle = exp_oracle(op, opt.oracle_tol);
  const auto grid = grid_or_default(opt, oracle);
  const auto profile = uniform_continuity_profile(oracle, grid);
  json rows = json::array();
  double best = 0.0;
  for (const auto& [t, v] : profile) {
    rows.push_back({{"t", t}, {"quotient_norm", v}});
    best = std::max(best, v);
  }
  json report = detail::base_report(
      "diagnose", {{"model", opt.model}, {"grid", grid}, {"oracle_tol", opt.oracle_tol}});
  report["outputs"] = {{"profile", rows}, {"max_quotient_norm", best},
                       {"beta_estimate", kBetaSafetyFactor * best}};
  report["status"] = "ok";
  detail::emit(report, opt, out);
  return kOk;
}

inline int cmd_recover(const Options& opt, std::ostream& out) {
  const RateOperator op = io::read_model_file(opt.model);
  const SpacePtr& space = op.space_ptr();

  const SemigroupOracle diag_oracle = exp_oracle(op, opt.oracle_tol);
  const auto grid = grid_or_default(opt, diag_oracle);
  const double diagnostic = uniform_continuity_diagnostic(diag_oracle, grid);
  const double beta = kBetaSafetyFactor * diagnostic;

  // The recovery oracle is tightened so that its error, amplified by the
  // number of subdivisions, stays a thousandth of the requested tolerance.
  const double subdivisions = std::max(1.0, std::ceil(beta * beta / (2.0 * opt.tol)));
  const double recovery_tol = 1e-3 * opt.tol / subdivisions;
  const SemigroupOracle oracle = exp_oracle(op, recovery_tol).with_beta_hint(beta);
  const RecoveredGenerator gen = recover_generator(oracle, opt.tol);

  json actions = json::array();
  double worst = 0.0;
  for (std::size_t x = 0; x < space->size(); ++x) {
    for (double sign : {1.0, -1.0}) {
      const Func g = sign * canonical_function(space, x);
      const Func recovered = gen.apply(g);
      const Func direct = op.apply(g);
      const double dev = sup_norm(recovered - direct);
      worst = std::max(worst, dev);
      actions.push_back({{"function", std::string(sign > 0 ? "+" : "-") + "(1-2*1_" +
                                          space->label(x) + ")"},
                         {"recovered", detail::values_json(recovered)},
                         {"model", detail::values_json(direct)},
                         {"deviation", dev}});
    }
  }
  const double recovered_norm = rate_norm(gen.apply, space);

  json report = detail::base_report(
      "recover", {{"model", opt.model}, {"tol", opt.tol}, {"grid", grid},
                  {"oracle_tol", opt.oracle_tol}});
  report["outputs"] = {{"space", space->labels()},
                       {"canonical_actions", actions},
                       {"recovered_norm", recovered_norm},
                       {"model_norm", op.norm()},
                       {"max_deviation", worst}};
  report["certificate"] = {{"bound", gen.bound},
                           {"oracle_slack", gen.oracle_slack},
                           {"subdivisions", gen.subdivisions},
                           {"beta", gen.beta},
                           {"diagnostic", diagnostic},
                           {"recovery_oracle_tol", recovery_tol},
                           {"modulo_oracle_error", gen.modulo_oracle_error}};
  report["status"] = "ok";
  detail::emit(report, opt, out);
  return kOk;
}

/// Parses argv and runs one subcommand. Reports go to `out`, diagnostics to
/// `err`. Exit codes: 0 ok, 1 check violation, 2 input error.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Upper and lower expectations of imprecise continuous-time Markov chains"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", opt.model, "model JSON file")->required()->check(CLI::ExistingFile);
    sub->add_flag("--pretty", opt.pretty, "human-readable output");
  };

  CLI::App* expect = app.add_subcommand("expect", "compute exp(tQ) f with a certified error bound");
  add_common(expect);
  expect->add_option("--function", opt.function, "function JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  expect->add_option("--time", opt.time, "time horizon t >= 0")->required();
  expect->add_option("--tol", opt.tol, "error tolerance");
  expect->add_option("--bound", opt.bound, "upper or lower")
      ->check(CLI::IsMember({"upper", "lower"}));

  CLI::App* norm = app.add_subcommand("norm", "exact operator norm of the rate operator");
  add_common(norm);

  CLI::App* check = app.add_subcommand("check", "sample the rate-operator axioms");
  add_common(check);
  check->add_flag("--deep", opt.deep, "also compare against vertex enumeration");
  check->add_option("--seed", opt.seed, "sampling seed");
  check->add_option("--samples", opt.samples, "number of sampled functions")
      ->check(CLI::PositiveNumber);

  CLI::App* recover = app.add_subcommand("recover", "recover the generator from exp(tQ)");
  add_common(recover);
  recover->add_option("--tol", opt.tol, "recovery tolerance");
  recover->add_option("--grid", opt.grid, "diagnostic times")->delimiter(',');
  recover->add_option("--oracle-tol", opt.oracle_tol, "tolerance of the diagnostic oracle");

  CLI::App* diagnose = app.add_subcommand("diagnose", "difference-quotient norms ||(T_t - I)/t||");
  add_common(diagnose);
  diagnose->add_option("--grid", opt.grid, "diagnostic times")->delimiter(',');
  diagnose->add_option("--oracle-tol", opt.oracle_tol, "tolerance of the semigroup oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*expect)
      return cmd_expect(opt, out);
    if (*norm)
      return cmd_norm(opt, out);
    if (*check)
      return cmd_check(opt, out);
    if (*recover)
      return cmd_recover(opt, out);
    if (*diagnose)
      return cmd_diagnose(opt, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

} // namespace ictmc::cli
