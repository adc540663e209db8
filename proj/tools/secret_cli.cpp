// Command-line front end. Talks to the library only through secret.h.
#include "secret.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string format = "json";
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

using Experiment = std::unique_ptr<secret_experiment, decltype(&secret_experiment_free)>;
using Report = std::unique_ptr<secret_report, decltype(&secret_report_free)>;

int report_failure(secret_status status, const char* stage) {
  std::fprintf(stderr, "secret: %s failed [%s]: %s\n", stage, secret_status_name(status), secret_last_error());
  return status == SECRET_ERR_INTERNAL ? 70 : 1;
}

// Writes to --out when given, stdout otherwise.
int deliver(const Options& opt, char* text) {
  int rc = 0;
  if (opt.out.empty()) {
    std::fputs(text, stdout);
  } else if (std::FILE* f = std::fopen(opt.out.c_str(), "wb")) {
    std::fputs(text, f);
    if (std::fclose(f) != 0) rc = 1;
  } else {
    rc = 1;
  }
  if (rc) std::fprintf(stderr, "secret: cannot write '%s'\n", opt.out.c_str());
  secret_string_free(text);
  return rc;
}

int with_experiment(const Options& opt, secret_format* format, Experiment& exp) {
  if (auto s = secret_parse_format(opt.format.c_str(), format); s != SECRET_OK) return report_failure(s, "format");
  secret_experiment* raw = nullptr;
  if (auto s = secret_experiment_load(opt.config.c_str(), &raw); s != SECRET_OK) return report_failure(s, "config");
  exp.reset(raw);
  if (opt.seed) {
    if (auto s = secret_experiment_set_seed(raw, *opt.seed); s != SECRET_OK) return report_failure(s, "seed");
  }
  if (opt.jobs) {
    if (auto s = secret_experiment_set_jobs(raw, *opt.jobs); s != SECRET_OK) return report_failure(s, "jobs");
  }
  return 0;
}

int cmd_run(const Options& opt) {
  secret_format format{};
  Experiment exp(nullptr, secret_experiment_free);
  if (int rc = with_experiment(opt, &format, exp)) return rc;
  secret_report* raw = nullptr;
  if (auto s = secret_experiment_run(exp.get(), &raw); s != SECRET_OK) return report_failure(s, "run");
  Report report(raw, secret_report_free);
  for (const char* name : {"secret", "feature_only", "semantic_only", "ensemble"}) {
    double acc = 0.0, f1 = 0.0;
    if (secret_report_mean_scores(report.get(), name, &acc, &f1) == SECRET_OK) {
      std::fprintf(stderr, "%-14s accuracy %.4f  macro-F1 %.4f\n", name, acc, f1);
    }
  }
  char* text = nullptr;
  if (auto s = secret_report_to_string(report.get(), format, &text); s != SECRET_OK) return report_failure(s, "report");
  return deliver(opt, text);
}

int cmd_validate(const Options& opt) {
  secret_format format{};
  Experiment exp(nullptr, secret_experiment_free);
  if (int rc = with_experiment(opt, &format, exp)) return rc;
  char* summary = nullptr;
  if (auto s = secret_experiment_validate(exp.get(), &summary); s != SECRET_OK) return report_failure(s, "validate");
  return deliver(opt, summary);
}

int cmd_distances(const Options& opt) {
  secret_format format{};
  Experiment exp(nullptr, secret_experiment_free);
  if (int rc = with_experiment(opt, &format, exp)) return rc;
  char* text = nullptr;
  if (auto s = secret_experiment_distances(exp.get(), format, &text); s != SECRET_OK) {
    return report_failure(s, "distances");
  }
  return deliver(opt, text);
}

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("config", opt.config, "Experiment config (JSON)")->required();
  cmd->add_option("--out", opt.out, "Write output here instead of stdout");
  cmd->add_option("--format", opt.format, "json or csv")->capture_default_str();
  cmd->add_option("--seed", opt.seed, "Override the config seed");
  cmd->add_option("--jobs", opt.jobs, "Folds run in parallel")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-space classification experiments"};
  app.set_version_flag("--version", std::string(secret_version()));
  app.require_subcommand(1);
  Options opt;
  auto* run = app.add_subcommand("run", "Run an experiment and emit its report");
  auto* validate = app.add_subcommand("validate", "Check data files and label vocabulary coverage");
  auto* distances = app.add_subcommand("distances", "Print pairwise distances between label vectors");
  for (auto* cmd : {run, validate, distances}) add_common(cmd, opt);
  CLI11_PARSE(app, argc, argv);
  if (run->parsed()) return cmd_run(opt);
  if (validate->parsed()) return cmd_validate(opt);
  return cmd_distances(opt);
}
