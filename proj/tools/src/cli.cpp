/*
 * Copyright 2026 The ASSS Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cli.hpp"

#include <exception>
#include <fstream>
#include <ostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "asss/error.hpp"
#include "asss/gradcheck.hpp"
#include "asss/harness.hpp"
#include "asss/metrics.hpp"
#include "asss/version.hpp"

namespace asss::cli {
namespace {

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << j.dump(2) << '\n';
  if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

int run_command(const std::string& config_path, const std::string& out_dir, bool quiet, std::ostream& out,
                std::ostream& err) {
  auto config = load_experiment_config(config_path);
  if (!out_dir.empty()) config.output_dir = out_dir;
  ProgressSink sink;
  if (!quiet) sink = [&err](std::string_view line) { err << line << '\n' << std::flush; };
  const RunReport report = run_experiment(config, sink);
  emit_reports(report, config.output_dir);
  std::size_t failed = 0;
  for (const auto& cell : report.cells) failed += cell.ok() ? 0 : 1;
  fmt::print(out, "{} cells, {} failed; reports in {}\n", report.cells.size(), failed, config.output_dir.string());
  for (const auto& s : report.summaries) {
    fmt::print(out, "  {:<12} macro-F {:.4f}  accuracy {:.4f}  AUC {:.4f}", to_string(s.method), s.macro_f.mean,
               s.accuracy.mean, s.macro_auc.mean);
    if (s.prr) fmt::print(out, "  PRR(macro-F) {:.4f}", s.prr->macro_f);
    fmt::print(out, "\n");
  }
  return kOk;
}

int subsample_command(const std::string& config_path, const std::string& method_name, const std::string& out_path,
                      std::ostream& out) {
  const auto method = parse_method(method_name);
  if (!method || *method == Method::kFull) {
    throw InvalidArgument(fmt::format("unknown subsampling method '{}' (random, kmeans, nn-thinning, asss)",
                                      method_name));
  }
  const auto config = load_experiment_config(config_path);
  const auto outcome = run_subsample(config, *method);
  const Dataset dataset = load_dataset(config.dataset);
  write_json_file(out_path, to_json(outcome, dataset));
  fmt::print(out, "{}: selected {} of {} rows -> {}\n", method_name, outcome.indices.size(), dataset.size(), out_path);
  return kOk;
}

int evaluate_command(const std::string& preds_path, std::ostream& out) {
  const auto stored = load_predictions(preds_path);
  out << to_json(evaluate(stored.predictions, stored.class_count)).dump(2) << '\n';
  return kOk;
}

int gradcheck_command(std::ostream& out) {
  bool all_passed = true;
  for (const auto& r : run_gradcheck_suite()) {
    fmt::print(out, "{} {:<26} partials={:<4} max_rel_err={:.3e} tol={:.0e}\n", r.passed ? "PASS" : "FAIL", r.name,
               r.partials, r.max_relative_error, r.tolerance);
    all_passed = all_passed && r.passed;
  }
  return all_passed ? kOk : kNumericalFailure;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adversarial soft-selection subsampling toolkit", "asss"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run a full cross-validated experiment");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run->add_flag("-q,--quiet", quiet, "Suppress progress lines");

  std::string method;
  std::string indices_out;
  auto* sub = app.add_subcommand("subsample", "Select a subset of the whole dataset");
  sub->add_option("config", config_path, "Experiment config (JSON)")->required();
  sub->add_option("--method", method, "random | kmeans | nn-thinning | asss")->required();
  sub->add_option("--out", indices_out, "Output indices JSON")->required();

  std::string preds;
  auto* eval = app.add_subcommand("evaluate", "Metrics on stored predictions");
  eval->add_option("--preds", preds, "Predictions JSON")->required();

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  auto* version = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kUsage;
  }

  try {
    if (run->parsed()) return run_command(config_path, out_dir, quiet, out, err);
    if (sub->parsed()) return subsample_command(config_path, method, indices_out, out);
    if (eval->parsed()) return evaluate_command(preds, out);
    if (grad->parsed()) return gradcheck_command(out);
    if (version->parsed()) {
      out << "asss " << kVersion << '\n';
      return kOk;
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace asss::cli
