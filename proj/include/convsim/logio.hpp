#pragma once

#include <span>
#include <string>
#include <vector>

#include "convsim/events.hpp"
#include "convsim/experiment.hpp"
#include "convsim/matrix.hpp"

namespace convsim {

inline constexpr int kLogSchemaVersion = 1;

// Line-delimited JSON, one record per event, fixed key order. Equal corpora
// serialize to byte-identical files.
void write_log(std::span<const Timeline> corpus, const std::string& path);
std::vector<Timeline> read_log(const std::string& path);

// In-memory variants used by tests and the round-trip contract.
std::string log_to_string(std::span<const Timeline> corpus);
std::vector<Timeline> log_from_string(const std::string& text, const std::string& origin);

// Parse and fully validate an experiment configuration; unknown or duplicate
// keys and constraint violations are errors naming the offending key.
ExperimentSpec parse_config(const std::string& path);
ExperimentSpec parse_config_text(const std::string& text, const std::string& origin);

// Canonical serialization of a spec; config_hash fingerprints it for reports.
std::string config_to_string(const ExperimentSpec& spec);

// Text matrix file: "rows cols" header line, then one row of space-separated
// shortest-round-trip decimals per line.
void save_matrix(const Matrix& m, const std::string& path);
Matrix load_matrix(const std::string& path);

}  // namespace convsim
