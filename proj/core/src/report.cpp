#include "phaseplane/report.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace phaseplane {

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t value, int digits) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, value);
    return std::string(buf).substr(0, static_cast<std::size_t>(digits));
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot open " + tmp.string() + " for writing");
        os << content;
    }
    std::filesystem::rename(tmp, path);
}

std::string ratio_report_csv(const RatioReport& report) {
    std::ostringstream os;
    os << "experiment,seed,size,lhs,rhs,ratio\n";
    for (const RatioRow& r : report.rows) {
        os << report.experiment << ',' << r.seed << ',' << r.size << ','
           << format_double(r.lhs) << ',' << format_double(r.rhs) << ','
           << format_double(r.ratio) << '\n';
    }
    return os.str();
}

std::string ratio_report_summary_json(const RatioReport& report) {
    nlohmann::ordered_json j;
    j["experiment"] = report.experiment;
    j["rows"] = report.rows.size();
    j["sizes"] = report.sizes;
    j["max"] = report.max_ratio;
    j["p95"] = report.p95;
    j["drift"] = report.max_drift;
    for (const auto& [key, value] : report.notes) j[key] = value;
    return j.dump(2) + "\n";
}

namespace {

nlohmann::ordered_json tile_entry(const Tile& t) {
    nlohmann::ordered_json j;
    j["kI"] = t.time.scale;
    j["nI"] = t.time.index;
    j["kW"] = t.freq.scale;
    j["nW"] = t.freq.index;
    return j;
}

Tile tile_from_entry(const nlohmann::json& j, const DyadicGrid& grid) {
    const std::int32_t kI = j.at("kI").get<std::int32_t>();
    const std::int64_t nI = j.at("nI").get<std::int64_t>();
    const std::int32_t kW = j.at("kW").get<std::int32_t>();
    const std::int64_t nW = j.at("nW").get<std::int64_t>();
    if (kW != -kI) throw Error("tile entry violates |I| * |omega| = 1");
    return Tile(grid, kI, nI, nW);
}

}  // namespace

std::string tiles_json(const GeneratedForest& forest) {
    nlohmann::ordered_json j;
    j["grid"]["t"] = forest.grid.time_origin;
    j["grid"]["r"] = forest.grid.time_unit;
    const std::vector<Tile> tiles = forest.all_tiles();
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const Tile& t : tiles) arr.push_back(tile_entry(t));
    j["tiles"] = std::move(arr);
    j["universe"]["kMin"] = forest.universe.scale_min;
    j["universe"]["kMax"] = forest.universe.scale_max;
    j["universe"]["window"] = forest.universe.time_halfwidth;
    j["universe"]["tprime"] = forest.grid.freq_origin;

    auto index_of = [&](const Tile& t) {
        const auto it = std::lower_bound(tiles.begin(), tiles.end(), t, tile_less);
        return static_cast<std::size_t>(it - tiles.begin());
    };
    nlohmann::ordered_json trees = nlohmann::ordered_json::array();
    for (const Tree& t : forest.trees) {
        nlohmann::ordered_json entry;
        entry["top"] = tile_entry(t.top());
        nlohmann::ordered_json members = nlohmann::ordered_json::array();
        for (const Tile& p : t.tiles()) members.push_back(index_of(p));
        entry["members"] = std::move(members);
        trees.push_back(std::move(entry));
    }
    j["trees"] = std::move(trees);
    return j.dump(2) + "\n";
}

GeneratedForest forest_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    GeneratedForest out;
    const double t = j.at("grid").at("t").get<double>();
    const double r = j.at("grid").at("r").get<double>();
    const double tprime = j.at("universe").value("tprime", 0.0);
    out.grid = DyadicGrid(t, r, tprime);
    out.universe.scale_min = j.at("universe").at("kMin").get<std::int32_t>();
    out.universe.scale_max = j.at("universe").at("kMax").get<std::int32_t>();
    out.universe.time_halfwidth = j.at("universe").at("window").get<double>();

    std::vector<Tile> tiles;
    for (const auto& entry : j.at("tiles")) tiles.push_back(tile_from_entry(entry, out.grid));

    if (j.contains("trees")) {
        for (const auto& entry : j.at("trees")) {
            const Tile top = tile_from_entry(entry.at("top"), out.grid);
            std::vector<Tile> members;
            for (const auto& idx : entry.at("members"))
                members.push_back(tiles.at(idx.get<std::size_t>()));
            out.trees.emplace_back(std::move(members), top, TreeKind::Up);
        }
    } else if (!tiles.empty()) {
        // Without tree structure, wrap every tile as a singleton up-tree.
        for (const Tile& p : tiles) out.trees.emplace_back(std::vector<Tile>{p}, p, TreeKind::Up);
    }
    return out;
}

std::string decomposition_json(const TileDecomposition& dec) {
    nlohmann::ordered_json j;
    j["input_tiles"] = dec.input_size;
    j["demotions"] = dec.demotions;
    nlohmann::ordered_json levels = nlohmann::ordered_json::array();
    for (const DecompositionLevel& lvl : dec.levels) {
        nlohmann::ordered_json entry;
        entry["n"] = lvl.level;
        entry["trees"] = lvl.trees.size();
        entry["interval_sum"] = lvl.interval_sum;
        entry["max_density"] = lvl.max_density;
        entry["max_energy"] = lvl.max_energy;
        entry["constant"] = lvl.empirical_constant;
        nlohmann::ordered_json tops = nlohmann::ordered_json::array();
        for (const Tree& t : lvl.trees) tops.push_back(tile_entry(t.top()));
        entry["tops"] = std::move(tops);
        levels.push_back(std::move(entry));
    }
    j["levels"] = std::move(levels);
    j["residual_tiles"] = dec.residual.size();
    j["residual_density"] = dec.residual_density;
    j["residual_energy"] = dec.residual_energy;
    return j.dump(2) + "\n";
}

std::string decomposition_csv(const TileDecomposition& dec,
                              const DensityEvaluator& density_eval,
                              const EnergyEvaluator& energy_eval) {
    std::ostringstream os;
    os << "n,j,interval,density,energy\n";
    for (const DecompositionLevel& lvl : dec.levels) {
        std::size_t jdx = 0;
        for (const Tree& t : lvl.trees) {
            os << lvl.level << ',' << jdx++ << ','
               << format_double(minimal_top_interval(t).length()) << ','
               << format_double(density_eval.density(t.tiles())) << ','
               << format_double(energy_eval.energy(t.tiles())) << '\n';
        }
    }
    return os.str();
}

}  // namespace phaseplane
