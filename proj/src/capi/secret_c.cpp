#include "secret.h"

#include "secret/experiment.hpp"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

struct secret_experiment {
  secret::ExperimentConfig config;
};

struct secret_report {
  secret::ExperimentReport report;
};

namespace {

thread_local std::string last_error;

secret_status to_status(secret::ErrorCode code) {
  using secret::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return SECRET_ERR_INVALID_ARGUMENT;
    case ErrorCode::io: return SECRET_ERR_IO;
    case ErrorCode::parse: return SECRET_ERR_PARSE;
    case ErrorCode::config: return SECRET_ERR_CONFIG;
    case ErrorCode::vocabulary: return SECRET_ERR_VOCABULARY;
    case ErrorCode::numeric: return SECRET_ERR_NUMERIC;
    case ErrorCode::unsupported_format: return SECRET_ERR_UNSUPPORTED_FORMAT;
  }
  return SECRET_ERR_INTERNAL;
}

// Runs f, translating exceptions into status codes.
template <typename F>
secret_status guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return SECRET_OK;
  } catch (const secret::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::parse_error& e) {
    last_error = e.what();
    return SECRET_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return SECRET_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SECRET_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return SECRET_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) secret::fail(secret::ErrorCode::invalid_argument, std::string(what) + " is null");
}

char* dup(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

secret::ReportFormat to_format(secret_format f) {
  switch (f) {
    case SECRET_FORMAT_JSON: return secret::ReportFormat::json;
    case SECRET_FORMAT_CSV: return secret::ReportFormat::csv;
  }
  secret::fail(secret::ErrorCode::unsupported_format, "unknown format code " + std::to_string(static_cast<int>(f)));
}

}  // namespace

extern "C" {

const char* secret_version(void) { return secret::kVersion; }

const char* secret_last_error(void) { return last_error.c_str(); }

const char* secret_status_name(secret_status status) {
  switch (status) {
    case SECRET_OK: return "ok";
    case SECRET_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SECRET_ERR_IO: return "io";
    case SECRET_ERR_PARSE: return "parse";
    case SECRET_ERR_CONFIG: return "config";
    case SECRET_ERR_VOCABULARY: return "vocabulary";
    case SECRET_ERR_NUMERIC: return "numeric";
    case SECRET_ERR_UNSUPPORTED_FORMAT: return "unsupported_format";
    case SECRET_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

secret_status secret_parse_format(const char* name, secret_format* out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = secret::parse_report_format(name) == secret::ReportFormat::json ? SECRET_FORMAT_JSON : SECRET_FORMAT_CSV;
  });
}

void secret_string_free(char* text) { std::free(text); }

secret_status secret_experiment_load(const char* config_path, secret_experiment** out) {
  return guarded([&] {
    need(config_path, "config_path");
    need(out, "out");
    *out = new secret_experiment{secret::load_config(config_path)};
  });
}

secret_status secret_experiment_from_json(const char* json_text, const char* base_dir, secret_experiment** out) {
  return guarded([&] {
    need(json_text, "json_text");
    need(out, "out");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
      secret::fail(secret::ErrorCode::parse, std::string("config: ") + e.what());
    }
    *out = new secret_experiment{secret::config_from_json(j, base_dir ? base_dir : "")};
  });
}

void secret_experiment_free(secret_experiment* experiment) { delete experiment; }

secret_status secret_experiment_set_seed(secret_experiment* experiment, uint64_t seed) {
  return guarded([&] {
    need(experiment, "experiment");
    experiment->config.seed = seed;
  });
}

secret_status secret_experiment_set_jobs(secret_experiment* experiment, int jobs) {
  return guarded([&] {
    need(experiment, "experiment");
    if (jobs < 1) secret::fail(secret::ErrorCode::invalid_argument, "jobs must be at least 1");
    experiment->config.jobs = jobs;
  });
}

secret_status secret_experiment_config_json(const secret_experiment* experiment, char** out) {
  return guarded([&] {
    need(experiment, "experiment");
    need(out, "out");
    *out = dup(secret::config_to_json(experiment->config).dump(2) + "\n");
  });
}

secret_status secret_experiment_validate(const secret_experiment* experiment, char** summary_json) {
  return guarded([&] {
    need(experiment, "experiment");
    const auto summary = secret::validate_config(experiment->config);
    if (summary_json) *summary_json = dup(secret::summary_to_json(summary).dump(2) + "\n");
  });
}

secret_status secret_experiment_distances(const secret_experiment* experiment, secret_format format, char** out) {
  return guarded([&] {
    need(experiment, "experiment");
    need(out, "out");
    *out = dup(secret::format_distances(secret::label_distances(experiment->config), to_format(format)));
  });
}

secret_status secret_experiment_run(const secret_experiment* experiment, secret_report** out) {
  return guarded([&] {
    need(experiment, "experiment");
    need(out, "out");
    *out = new secret_report{secret::run_experiment(experiment->config)};
  });
}

void secret_report_free(secret_report* report) { delete report; }

secret_status secret_report_to_string(const secret_report* report, secret_format format, char** out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    *out = dup(secret::format_report(report->report, to_format(format)));
  });
}

secret_status secret_report_write(const secret_report* report, const char* path, secret_format format) {
  return guarded([&] {
    need(report, "report");
    need(path, "path");
    secret::emit_report(report->report, path, to_format(format));
  });
}

secret_status secret_report_from_json(const char* json_text, secret_report** out) {
  return guarded([&] {
    need(json_text, "json_text");
    need(out, "out");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      secret::fail(secret::ErrorCode::parse, std::string("report: ") + e.what());
    }
    *out = new secret_report{secret::report_from_json(j)};
  });
}

size_t secret_report_fold_count(const secret_report* report) { return report ? report->report.folds.size() : 0; }

secret_status secret_report_mean_scores(const secret_report* report, const char* approach, double* accuracy,
                                        double* macro_f1) {
  return guarded([&] {
    need(report, "report");
    need(approach, "approach");
    const auto* s = report->report.find_summary(approach);
    if (!s) secret::fail(secret::ErrorCode::invalid_argument, std::string("no approach '") + approach + "' in report");
    if (accuracy) *accuracy = s->mean_accuracy;
    if (macro_f1) *macro_f1 = s->mean_macro_f1;
  });
}

secret_status secret_semantic_confidence(const double* outputs, size_t n, size_t dim, const double* label_vectors,
                                         size_t n_classes, double epsilon, double* confidences, int* diverged) {
  return guarded([&] {
    need(outputs, "outputs");
    need(label_vectors, "label_vectors");
    need(confidences, "confidences");
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto rows = static_cast<Eigen::Index>(n), cols = static_cast<Eigen::Index>(dim),
               classes = static_cast<Eigen::Index>(n_classes);
    secret::LabelVectorSet vs;
    vs.V = Eigen::Map<const RowMajor>(label_vectors, classes, cols);
    const secret::Matrix out = Eigen::Map<const RowMajor>(outputs, rows, cols);
    const auto conf = secret::semantic_confidence(out, vs, epsilon);
    Eigen::Map<RowMajor>(confidences, rows, classes) = conf.scores;
    if (diverged) {
      for (size_t i = 0; i < n; ++i) diverged[i] = conf.diverged[i] ? 1 : 0;
    }
  });
}

secret_status secret_fuse_and_decide(const double* fs, const double* ss, size_t n, size_t n_classes, int* labels) {
  return guarded([&] {
    need(fs, "fs");
    need(ss, "ss");
    need(labels, "labels");
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto rows = static_cast<Eigen::Index>(n), classes = static_cast<Eigen::Index>(n_classes);
    const secret::ConfidenceMatrix a(Eigen::Map<const RowMajor>(fs, rows, classes));
    const secret::ConfidenceMatrix b(Eigen::Map<const RowMajor>(ss, rows, classes));
    const auto decided = secret::fuse_and_decide(a, b);
    std::copy(decided.begin(), decided.end(), labels);
  });
}

secret_status secret_scores(const int* y_true, const int* y_pred, size_t n, int n_classes, double* accuracy,
                            double* macro_f1) {
  return guarded([&] {
    need(y_true, "y_true");
    need(y_pred, "y_pred");
    const auto s = secret::score({y_true, n}, {y_pred, n}, n_classes);
    if (accuracy) *accuracy = s.accuracy;
    if (macro_f1) *macro_f1 = s.macro_f1;
  });
}

}  // extern "C"
