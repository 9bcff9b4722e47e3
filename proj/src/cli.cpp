#include "robustdx/cli.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "robustdx/optimize.hpp"

namespace robustdx {

namespace {

using nlohmann::json;

struct ResolvedDesign {
  ExactDesign design;
  std::optional<OptimizationResult> optimization;
};

OptimizeOptions optimize_options(const Scenario& s) { return {s.tolerances.max_iter, s.tolerances.optimize, {}}; }

ResolvedDesign resolve_design(const Scenario& s) {
  if (s.counts) return {*s.counts, std::nullopt};
  OptimizationResult opt = optimize_measure(s.space, s.criterion, optimize_options(s));
  ExactDesign exact = measure_to_exact(opt.xi, s.runs);
  opt.exact = exact;
  return {exact, std::move(opt)};
}

SearchOptions effective_search(const Scenario& s, const CommandFlags& flags) {
  SearchOptions opts = s.search;
  if (flags.seed) opts.seed = *flags.seed;
  if (flags.budget) opts.budget = *flags.budget;
  return opts;
}

json search_json(const SearchOptions& o) {
  return json{{"budget", o.budget}, {"restarts", o.restarts}, {"seed", o.seed}};
}

json class_json(const CovClass& cls) {
  return json{{"variant", std::string(cls.name())}, {"dim", cls.dim()}, {"effective_eta2", cls.effective_eta2()}};
}

std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

json optimization_json(const Scenario& s, const OptimizationResult& opt) {
  json j = to_json(opt, s.space);
  if (s.criterion.kind() == Criterion::Kind::D) j["equivalence_gap"] = equivalence_gap(s.space, opt.xi);
  return j;
}

CommandResult run_verify_lemma(const Scenario& s, const SearchOptions& search) {
  const ResolvedDesign rd = resolve_design(s);
  const Matrix x = model_matrix(s.space, rd.design);
  const CovClass cls = s.cov_class.build(x.rows());
  const WorstCaseReport report = verify_lemma(cls, s.criterion, x, search, s.tolerances.certify);

  CommandResult out;
  out.record.results = json{{"criterion", s.criterion.name()},
                            {"class", class_json(cls)},
                            {"design", rd.design.counts()},
                            {"search", search_json(search)},
                            {"worst_case", to_json(report)}};
  if (rd.optimization) out.record.results["optimization"] = optimization_json(s, *rd.optimization);
  out.exit_code = report.pass ? kExitPass : kExitCertificationFailure;
  out.summary = std::string(report.pass ? "PASS" : "FAIL") + " analytic=" + format_number(report.analytic_value) +
                " searched=" + format_number(report.searched_value) + " gap=" + format_number(report.gap);
  return out;
}

CommandResult run_worst_case(const Scenario& s, const SearchOptions& search) {
  const ClassBuilder builder = [&s](Index runs) { return s.cov_class.build(runs); };
  CommandResult out;
  json results{{"criterion", s.criterion.name()}, {"search", search_json(search)}};
  WorstCaseReport lemma;
  bool is_minimax = false;
  if (s.counts) {
    const Matrix x = model_matrix(s.space, *s.counts);
    const CovClass cls = builder(x.rows());
    lemma = verify_lemma(cls, s.criterion, x, search, s.tolerances.certify);
    std::vector<ExactDesign> candidates{*s.counts};
    for (auto& e : single_swap_competitors(s.space, *s.counts)) candidates.push_back(std::move(e));
    const MinimaxReport mm = minimax_check(candidates, s.space, builder, s.criterion);
    is_minimax = mm.argmin == 0;
    results["class"] = class_json(cls);
    results["design"] = s.counts->counts();
    results["minimax"] = to_json(mm, candidates);
  } else {
    const PipelineResult pr =
        pipeline_minimax(s.space, s.criterion, builder, s.runs, search, optimize_options(s), s.tolerances.certify);
    lemma = pr.lemma;
    is_minimax = pr.xi0_is_minimax;
    results["class"] = class_json(builder(s.runs));
    results["design"] = pr.exact.counts();
    results["optimization"] = optimization_json(s, pr.xi0);
    results["minimax"] = to_json(pr.minimax, pr.candidates);
  }
  results["worst_case"] = to_json(lemma);
  results["design_is_minimax"] = is_minimax;
  out.record.results = std::move(results);
  out.exit_code = lemma.pass ? kExitPass : kExitCertificationFailure;
  out.summary = std::string(lemma.pass ? "PASS" : "FAIL") + " worst=" + format_number(lemma.analytic_value) +
                " gap=" + format_number(lemma.gap) + (is_minimax ? " minimax" : " not-minimax");
  return out;
}

CommandResult run_optimize(const Scenario& s) {
  OptimizationResult opt = optimize_measure(s.space, s.criterion, optimize_options(s));
  opt.exact = measure_to_exact(opt.xi, s.runs);
  CommandResult out;
  out.record.results = json{{"criterion", s.criterion.name()}, {"optimization", optimization_json(s, opt)}};
  out.summary = "criterion_value=" + format_number(opt.criterion_value) +
                " iterations=" + std::to_string(opt.iterations);
  return out;
}

CommandResult run_robust_eval(const Scenario& s) {
  if (!s.robust) throw Error(ErrorCode::InvalidArgument, "robust: section required for robust-eval");
  const RobustSpec& spec = *s.robust;
  const ResolvedDesign rd = resolve_design(s);
  const CovClass base = s.cov_class.build(rd.design.total());
  const std::vector<double> eta2_grid = spec.eta2_grid.empty() ? std::vector<double>{base.effective_eta2()}
                                                                : spec.eta2_grid;
  const std::vector<double> tau2_grid = spec.tau2_grid.empty() ? std::vector<double>{spec.tau2} : spec.tau2_grid;

  std::ostringstream csv;
  csv << "eta2,tau2,cov_part,psi_part,total\n";
  json rows = json::array();
  for (double eta2 : eta2_grid) {
    const CovClass cls = base.rescaled_to(eta2);
    for (double tau2 : tau2_grid) {
      const ExtendedMinimax v = extended_minimax_value(s.space, rd.design, cls, spec.loss, tau2);
      rows.push_back(json{{"eta2", eta2},
                          {"tau2", tau2},
                          {"cov_part", v.cov_part},
                          {"psi_part", v.psi_part},
                          {"total", v.total},
                          {"worst_psi", to_json(v.worst_psi.values())}});
      csv << format_number(eta2) << ',' << format_number(tau2) << ',' << format_number(v.cov_part) << ','
          << format_number(v.psi_part) << ',' << format_number(v.total) << '\n';
    }
  }
  CommandResult out;
  out.record.results = json{{"loss", spec.loss == RobustLoss::I ? "I-robust" : "D-robust"},
                            {"class", class_json(base)},
                            {"design", rd.design.counts()},
                            {"rows", rows}};
  if (rd.optimization) out.record.results["optimization"] = optimization_json(s, *rd.optimization);
  out.csv = csv.str();
  out.summary = std::to_string(rows.size()) + " rows";
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  f << text;
}

}  // namespace

CommandResult execute_command(const std::string& command, const Scenario& scenario, const CommandFlags& flags) {
  const auto start = std::chrono::steady_clock::now();
  const SearchOptions search = effective_search(scenario, flags);
  CommandResult out;
  if (command == "verify-lemma") {
    out = run_verify_lemma(scenario, search);
  } else if (command == "worst-case") {
    out = run_worst_case(scenario, search);
  } else if (command == "optimize") {
    out = run_optimize(scenario);
  } else if (command == "robust-eval") {
    out = run_robust_eval(scenario);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown command '" + command + "'");
  }
  out.record.command = command;
  out.record.scenario = scenario.source;
  out.record.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimax-robust experimental design under uncertain error covariance"};
  app.name("robustdx");
  app.require_subcommand(1);

  struct Inputs {
    std::string scenario;
    std::string out_path;
    std::string csv_path;
    std::optional<std::uint64_t> seed;
    std::optional<long> budget;
    bool quiet = false;
  } in;

  const std::vector<std::pair<const char*, const char*>> commands{
      {"verify-lemma", "Certify that the worst-case covariance is the scaled identity"},
      {"worst-case", "Worst case over the class, plus minimax ranking against single-swap competitors"},
      {"optimize", "Compute the design that is optimal under iid errors"},
      {"robust-eval", "Extended minimax values over (contaminant, covariance)"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("scenario", in.scenario, "Scenario JSON file")->required();
    sub->add_option("--out", in.out_path, "Write the report here instead of stdout");
    sub->add_option("--seed", in.seed, "Override search.seed");
    sub->add_option("--budget", in.budget, "Override search.budget")->check(CLI::NonNegativeNumber);
    sub->add_flag("--quiet", in.quiet, "No summary line on stderr");
    if (std::string(name) == "robust-eval") {
      sub->add_option("--csv", in.csv_path, "CSV table path (default: <out>.csv when --out is given)");
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitInputError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    const Scenario scenario = load_scenario(in.scenario);
    const CommandResult result = execute_command(command, scenario, CommandFlags{in.seed, in.budget});
    const std::string text = to_json(result.record).dump(2) + "\n";
    if (in.out_path.empty()) {
      out << text;
    } else {
      write_text(in.out_path, text);
    }
    if (!result.csv.empty()) {
      std::string csv_path = in.csv_path;
      if (csv_path.empty() && !in.out_path.empty()) csv_path = in.out_path + ".csv";
      if (!csv_path.empty()) write_text(csv_path, result.csv);
    }
    if (!in.quiet) err << command << ": " << result.summary << "\n";
    return result.exit_code;
  } catch (const Error& e) {
    err << "robustdx " << command << ": error: " << e.detail() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "robustdx " << command << ": error: " << e.what() << "\n";
    return kExitInputError;
  }
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace robustdx
