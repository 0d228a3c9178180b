#include "phaseplane/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "phaseplane/report.hpp"

namespace phaseplane {

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& into) {
    if (j.contains(key)) {
        try {
            into = j.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(key, std::string("config field '") + key + "' has the wrong type");
        }
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("<root>", std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig c;
    if (j.contains("grid")) {
        read_field(j["grid"], "t", c.grid_t);
        read_field(j["grid"], "r", c.grid_r);
        read_field(j["grid"], "tprime", c.grid_tprime);
    }
    read_field(j, "window", c.window);
    read_field(j, "samples", c.samples);
    read_field(j, "scale_min", c.scale_min);
    read_field(j, "scale_max", c.scale_max);
    read_field(j, "top_scale_min", c.top_scale_min);
    read_field(j, "top_scale_max", c.top_scale_max);
    read_field(j, "time_halfwidth", c.time_halfwidth);
    read_field(j, "top_freq_halfwidth", c.top_freq_halfwidth);
    read_field(j, "tree_count", c.tree_count);
    read_field(j, "tiles_per_tree", c.tiles_per_tree);
    if (j.contains("value")) {
        read_field(j["value"], "kind", c.value_kind);
        read_field(j["value"], "dim", c.value_dim);
        read_field(j["value"], "p", c.value_p);
    }
    read_field(j, "q", c.q);
    read_field(j, "alpha", c.alpha);
    read_field(j, "alphas", c.alphas);
    read_field(j, "p_exponents", c.p_exponents);
    read_field(j, "seeds", c.seeds);
    read_field(j, "base_seed", c.base_seed);
    read_field(j, "sizes", c.sizes);
    read_field(j, "K", c.major_subset_K);
    read_field(j, "maximal_refinement", c.maximal_refinement);
    read_field(j, "periodic_samples", c.periodic_samples);
    read_field(j, "convergence_orders", c.convergence_orders);
    read_field(j, "experiments", c.experiments);
    read_field(j, "out", c.out_dir);
    read_field(j, "threads", c.threads);
    read_field(j, "tiles_file", c.tiles_file);
    return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config", "cannot open config file " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return from_json_text(buf.str());
}

void ExperimentConfig::apply_env_overrides() {
    if (const char* seed = std::getenv("PHASEPLANE_SEED")) {
        try {
            base_seed = std::stoull(seed);
        } catch (...) {
            throw ConfigError("PHASEPLANE_SEED", "environment seed is not an integer");
        }
    }
    if (const char* out = std::getenv("PHASEPLANE_OUT")) out_dir = out;
}

ValueSpace ExperimentConfig::value_space() const {
    if (value_kind == "scalar") return ValueSpace::scalar();
    if (value_kind == "hilbert") return ValueSpace::hilbert(value_dim);
    if (value_kind == "schatten") return ValueSpace::schatten(value_p, value_dim);
    throw ConfigError("value.kind", "unknown value kind '" + value_kind +
                                        "' (expected scalar, hilbert, or schatten)");
}

void ExperimentConfig::validate() const {
    if (!(grid_r > 0.0)) throw ConfigError("grid.r", "grid dilation r must be positive");
    if (!(window > 0.0)) throw ConfigError("window", "window must be positive");
    if (!fft::is_power_of_two(samples))
        throw ConfigError("samples", "sample count must be a power of two");
    if (!fft::is_power_of_two(periodic_samples))
        throw ConfigError("periodic_samples", "periodic sample count must be a power of two");
    if (maximal_refinement < 1)
        throw ConfigError("maximal_refinement", "maximal refinement must be >= 1");
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0))
            throw ConfigError("alphas", "each alpha must lie in (0, 1)");
    for (int n : convergence_orders)
        if (n < 0 || static_cast<std::size_t>(n) >= periodic_samples / 2)
            throw ConfigError("convergence_orders",
                              "orders must fit inside the periodic band");
    for (const std::string& e : experiments)
        if (e != "basic" && e != "weak" && e != "log" && e != "fourier")
            throw ConfigError("experiments", "unknown experiment '" + e + "'");
    lab().validate();
}

LabConfig ExperimentConfig::lab() const {
    LabConfig c;
    c.grid = DyadicGrid(grid_t, grid_r, grid_tprime);
    c.window = window;
    c.samples = samples;
    c.ensemble.tree_count = tree_count;
    c.ensemble.tiles_per_tree = tiles_per_tree;
    c.ensemble.member_scale_min = scale_min;
    c.ensemble.member_scale_max = scale_max;
    c.ensemble.top_scale_min = top_scale_min;
    c.ensemble.top_scale_max = top_scale_max;
    c.ensemble.time_halfwidth = time_halfwidth;
    c.ensemble.top_freq_halfwidth = top_freq_halfwidth;
    c.space = value_space();
    c.q = q;
    c.alpha = alpha;
    c.p_exponents = p_exponents;
    c.seeds = seeds;
    c.base_seed = base_seed;
    c.sizes = sizes;
    c.major_subset_K = major_subset_K;
    c.threads = threads;
    return c;
}

std::string ExperimentConfig::canonical_json() const {
    nlohmann::json j;   // plain json sorts keys lexicographically
    j["grid"]["t"] = grid_t;
    j["grid"]["r"] = grid_r;
    j["grid"]["tprime"] = grid_tprime;
    j["window"] = window;
    j["samples"] = samples;
    j["scale_min"] = scale_min;
    j["scale_max"] = scale_max;
    j["top_scale_min"] = top_scale_min;
    j["top_scale_max"] = top_scale_max;
    j["time_halfwidth"] = time_halfwidth;
    j["top_freq_halfwidth"] = top_freq_halfwidth;
    j["tree_count"] = tree_count;
    j["tiles_per_tree"] = tiles_per_tree;
    j["value"]["kind"] = value_kind;
    j["value"]["dim"] = value_dim;
    j["value"]["p"] = value_p;
    j["q"] = q;
    j["alpha"] = alpha;
    j["alphas"] = alphas;
    j["p_exponents"] = p_exponents;
    j["seeds"] = seeds;
    j["base_seed"] = base_seed;
    j["sizes"] = sizes;
    j["K"] = major_subset_K;
    j["maximal_refinement"] = maximal_refinement;
    j["periodic_samples"] = periodic_samples;
    j["convergence_orders"] = convergence_orders;
    j["experiments"] = experiments;
    j["tiles_file"] = tiles_file;
    return j.dump();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(canonical_json()); }

}  // namespace phaseplane
