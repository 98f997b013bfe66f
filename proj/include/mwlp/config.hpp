#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mwlp/besov.hpp"
#include "mwlp/spectral.hpp"
#include "mwlp/weights.hpp"

namespace mwlp {

enum class Command { ap_constant, doubling, sampling_check, multiplier_bound, besov_equiv, all };

std::string to_string(Command c);
std::optional<Command> command_from_string(std::string_view s);

struct GridConfig {
    int T = 64;
    int m = 512;
    double shift = 0.5;
};

struct CubeConfig {
    int j_min = -6;
    int j_max = 5;
    double X = 32.0;
    int q = 64;
    std::vector<int> q_trace;  // optional refinement levels for ap-constant
    int window = 4;
};

struct BesovConfig {
    PartitionSpec psi;
    PartitionSpec phi = [] {
        PartitionSpec w;
        w.c1 = 0.70710678118654752;
        w.c2 = 2.8284271247461901;
        return w;
    }();
    double M = 4.0;
    GridConfig grid{512, 65536, 0.5};
    GridConfig decay_grid{4096, 524288, 0.0};
    double inner = 0.25;  // shell corpus band, must lie in both covered interiors
    double outer = 8.0;
};

/// Everything one run needs. Defaults give a desk-scale experiment for every
/// command.
struct ExperimentConfig {
    Command command = Command::all;
    int n = 1;
    WeightSpec weight = identity_weight(1, 2);
    std::string weight_file;
    double p = 1.0;
    double q = 1.0;
    double s = 0.5;
    GridConfig grid;
    CubeConfig cubes;
    SymbolSpec symbol;
    double M = 3.0;
    std::size_t corpus_size = 32;
    std::vector<double> R_list{0.25, 1.0, 4.0};
    std::vector<double> offsets{0.0, 0.5};
    std::size_t sampling_fields = 8;
    BesovConfig besov;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    unsigned threads = 1;
};

struct Validation {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;
};

/// Parses `key = value` lines ('#' starts a comment, lists are comma
/// separated), fills defaults and checks ranges. Never throws; `config` is set
/// iff `errors` is empty.
Validation validate(std::string_view text);

/// Reads and validates a config file. Throws IoFailure if unreadable and
/// ConfigInvalid with all messages joined otherwise.
ExperimentConfig load_config(const std::string& path);

/// Re-checks an already built config (e.g. after command-line overrides).
std::vector<std::string> check(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace mwlp
