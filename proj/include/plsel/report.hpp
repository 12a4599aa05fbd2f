#pragma once

// JSON payloads and the versioned report envelope.

#include <json.hpp>

#include <string>
#include <vector>

#include "plsel/inference.hpp"
#include "plsel/linmodel.hpp"
#include "plsel/selector.hpp"
#include "plsel/simlab.hpp"

namespace plsel {

inline constexpr const char* kReportSchema = "report-v1";
inline constexpr const char* kVersion = "1.0.0";

using json = nlohmann::ordered_json;

json matrix_json(const Eigen::MatrixXd& m);

/// Column names are taken from the dataset the result was computed on.
json fit_json(const FitResult& fit, const std::vector<std::string>& names);
json inference_json(const InferenceReport& report, const std::vector<std::string>& names);
json selection_json(const SelectionResult& result, const std::vector<std::string>& names);
json experiment_json(const ExperimentReport& report);

json function_json(const FunctionSpec& fn);
FunctionSpec function_from_json(const json& j);
json dgp_json(const DgpSpec& spec);

/// Missing optional fields take the catalog defaults. Throws InvalidSpec.
DgpSpec dgp_from_json(const json& j);

/// Parses a DGP file; malformed JSON raises ParseError.
DgpSpec load_dgp_file(const std::string& path);

struct Envelope {
  std::string command;
  json config;
  json payload;
  std::vector<std::string> warnings;
  double elapsed_seconds = 0.0;
  int threads = 1;
};

/// {schema, version, timestamp, command, config, payload, warnings, timing}.
json envelope_json(const Envelope& envelope);

/// One row per replication record.
std::string replications_csv(const ExperimentReport& report);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace plsel
