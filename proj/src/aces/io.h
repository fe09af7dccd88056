#ifndef ACES_IO_H
#define ACES_IO_H

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aces/circuit.h"
#include "aces/design.h"
#include "aces/estimate.h"
#include "aces/noise.h"
#include "aces/optimise.h"
#include "aces/simulator.h"

namespace aces {

using Json = nlohmann::json;

// File-level failures (missing, unreadable, malformed, truncated); kept
// distinct from numerical errors so callers can map them to exit codes.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Json load_json_file(const std::string& path);
void save_json_file(const Json& j, const std::string& path);

Json circuit_to_json(const Circuit& c);
Circuit circuit_from_json(const Json& j);

Json noise_to_json(const NoiseModel& m);
NoiseModel noise_from_json(const Json& j);

// Designs persist as circuit + tuples + weights; blocks are rebuilt
// deterministically on load.
Json design_to_json(const ExperimentalDesign& d);
ExperimentalDesign design_from_json(const Json& j);

// Outcome datasets persist as a JSON header `path` plus a little-endian
// binary count file alongside it (header field "counts_file"): one int64 of
// +1 counts per (tuple, experiment, row), in design order.
void save_dataset(const OutcomeDataset& data, const std::string& path);
OutcomeDataset load_dataset(const std::string& path);

Json report_to_json(const EstimationReport& rep);

void write_history_csv(const OptimisationHistory& history, const std::string& path);
// Per-gate distributions: gate id, type, local Pauli index, estimate and
// optional truth.
void write_distributions_csv(const ExperimentalDesign& d, const NoiseModel& recovered,
                             const NoiseModel* truth, const std::string& path);
void write_metrics_csv(const EstimationReport& rep, const std::string& path);

// A tuple-set file: tuples given as (pattern, repetitions) pairs with shot
// weights, tied to a circuit family and the distance they were optimised at.
struct TupleSetFile {
    std::string family;
    int distance = 0;
    std::vector<LayerTuple> tuples;  // patterns expanded
    std::vector<double> weights;
};

TupleSetFile load_tuple_set(const std::string& path);

struct RunManifest {
    std::string command;
    std::string config_hash;
    std::vector<std::string> inputs;
    uint64_t seed = 0;
    std::vector<std::string> outputs;
    std::vector<std::pair<std::string, double>> timings_ms;
};

// Written atomically (temp file + rename) as the last artifact of a command.
void write_manifest(const RunManifest& m, const std::string& path);

// Stable hex digest of a configuration string for the manifest.
std::string config_digest(const std::string& text);

}  // namespace aces

#endif
