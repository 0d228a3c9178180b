#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "phaseplane/experiments.hpp"

namespace phaseplane {

// Experiment configuration shared by every CLI command. Loaded from JSON,
// validated against the module preconditions before any computation; the
// PHASEPLANE_SEED and PHASEPLANE_OUT environment variables override the seed
// and output directory only.
struct ExperimentConfig {
    // grid
    double grid_t = 0.0;
    double grid_r = 1.0;
    double grid_tprime = 0.0;
    // sampling
    double window = 320.0;
    std::size_t samples = 4096;
    // ensemble geometry
    int scale_min = -1;
    int scale_max = 2;
    int top_scale_min = 4;
    int top_scale_max = 6;
    double time_halfwidth = 128.0;
    double top_freq_halfwidth = 1.0;
    int tree_count = 2;
    int tiles_per_tree = 5;
    // value space
    std::string value_kind = "hilbert";
    int value_dim = 4;
    double value_p = 2.0;
    // exponents
    double q = 2.0;
    double alpha = 0.9;
    std::vector<double> alphas{0.5, 0.9};
    std::vector<double> p_exponents{1.25, 2.0, 4.0};
    // ensemble sizes
    int seeds = 100;
    std::uint64_t base_seed = 1;
    int sizes = 3;
    // constants and knobs
    double major_subset_K = 16.0;
    int maximal_refinement = 4;
    std::size_t periodic_samples = 512;
    std::vector<int> convergence_orders{1, 2, 4, 8, 16, 32, 64};
    // experiment selection for `tile-type`
    std::vector<std::string> experiments{"basic", "weak", "log", "fourier"};
    // IO
    std::string out_dir = "out";
    int threads = 0;
    std::string tiles_file;   // optional decompose input

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_json_file(const std::filesystem::path& path);

    void apply_env_overrides();
    void validate() const;            // throws ConfigError naming the field
    ValueSpace value_space() const;
    LabConfig lab() const;
    std::string canonical_json() const;
    std::uint64_t hash() const;
};

}  // namespace phaseplane
