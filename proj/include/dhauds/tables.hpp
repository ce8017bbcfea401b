#pragma once

// Severity grids and noise-type pools for the corruption engine, with the
// shipped defaults, config file round-trip and cross-checks.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dhauds/errors.hpp"
#include "dhauds/rng.hpp"
#include "dhauds/textio.hpp"

namespace dhauds {

enum class Family { WHN, EN, TST, PSH };
enum class Level { L1, L2 };

inline std::string to_string(Family f) {
    switch (f) {
        case Family::WHN: return "WHN";
        case Family::EN: return "EN";
        case Family::TST: return "TST";
        case Family::PSH: return "PSH";
    }
    return "?";
}

inline std::string to_string(Level l) { return l == Level::L1 ? "L1" : "L2"; }

inline Level parse_level(const std::string& s) {
    if (s == "L1") return Level::L1;
    if (s == "L2") return Level::L2;
    throw ConfigError("unknown level '" + s + "'");
}

inline Family parse_family(const std::string& s) {
    if (s == "WHN") return Family::WHN;
    if (s == "EN") return Family::EN;
    if (s == "TST") return Family::TST;
    if (s == "PSH") return Family::PSH;
    throw ConfigError("unknown corruption family '" + s + "'");
}

/// Corruption ids as used by the criteria registry.
inline const std::vector<std::string>& corruption_ids() {
    static const std::vector<std::string> ids = {"WHN", "ENQ", "END1", "END2", "ENSC", "PSH", "TST"};
    return ids;
}

/// Grid family behind a corruption id (all EN* ids share the EN grid).
inline Family family_of(const std::string& corruption_id) {
    if (corruption_id == "WHN") return Family::WHN;
    if (corruption_id == "ENQ" || corruption_id == "END1" || corruption_id == "END2" ||
        corruption_id == "ENSC")
        return Family::EN;
    if (corruption_id == "TST") return Family::TST;
    if (corruption_id == "PSH") return Family::PSH;
    throw ConfigError("unknown corruption id '" + corruption_id + "'");
}

inline bool is_noise_family(Family f) { return f == Family::WHN || f == Family::EN; }

struct SeverityGrid {
    Family family = Family::WHN;
    Level level = Level::L1;
    std::vector<double> values;  // ascending
};

/// Uniform draw over the grid values.
inline double sample_severity(const SeverityGrid& grid, Rng& rng) {
    if (grid.values.empty()) throw ConfigError("sample_severity: empty grid");
    return grid.values[rng.below(grid.values.size())];
}

struct NoisePool {
    std::string corruption_id;
    Level level = Level::L1;
    std::vector<std::string> noise_types;  // sorted, unique
};

struct ValidationReport {
    bool pass = true;
    std::vector<std::string> violations;

    void fail(std::string msg) {
        pass = false;
        violations.push_back(std::move(msg));
    }
};

class CorruptionTables {
public:
    void set_grid(Family f, Level l, std::vector<double> values) {
        grids_[key(to_string(f), l)] = SeverityGrid{f, l, std::move(values)};
    }

    void set_pool(const std::string& corruption_id, Level l, std::vector<std::string> types) {
        std::sort(types.begin(), types.end());
        types.erase(std::unique(types.begin(), types.end()), types.end());
        pools_[key(corruption_id, l)] = NoisePool{corruption_id, l, std::move(types)};
    }

    const SeverityGrid& grid(Family f, Level l) const {
        const auto it = grids_.find(key(to_string(f), l));
        if (it == grids_.end())
            throw ConfigError("no severity grid for " + to_string(f) + "-" + to_string(l));
        return it->second;
    }

    const NoisePool& pool(const std::string& corruption_id, Level l) const {
        const auto it = pools_.find(key(corruption_id, l));
        if (it == pools_.end())
            throw ConfigError("no noise pool for " + corruption_id + "-" + to_string(l));
        return it->second;
    }

    bool has_pool(const std::string& corruption_id, Level l) const {
        return pools_.count(key(corruption_id, l)) > 0;
    }

    const std::map<std::string, SeverityGrid>& grids() const { return grids_; }
    const std::map<std::string, NoisePool>& pools() const { return pools_; }

    /// Table defaults used throughout: WHN/EN values are SNR dB, TST percent,
    /// PSH semitones.
    static CorruptionTables defaults() {
        CorruptionTables t;
        t.set_grid(Family::WHN, Level::L1, {6.0, 6.5, 7.0});
        t.set_grid(Family::WHN, Level::L2, {5.0, 5.5, 6.0, 6.5, 7.0});
        t.set_grid(Family::EN, Level::L1, {5.0, 5.5, 6.0});
        t.set_grid(Family::EN, Level::L2, {5.0, 5.5, 6.0, 6.5, 7.0});
        t.set_grid(Family::TST, Level::L1, {-6, -5, -4, 4, 5, 6});
        t.set_grid(Family::TST, Level::L2, {-12, -11, -10, -9, -8, 8, 9, 10, 11, 12});
        t.set_grid(Family::PSH, Level::L1, {-5, -4, 4, 5});
        t.set_grid(Family::PSH, Level::L2, {-7, -6, -5, 5, 6, 7});

        t.set_pool("WHN", Level::L1, {"Gaussian", "Random"});
        t.set_pool("WHN", Level::L2, {"Gaussian", "Random"});
        t.set_pool("ENQ", Level::L1, {"HOME", "REVERB", "STREET"});
        t.set_pool("ENQ", Level::L2, {"CAFE", "CAR", "HOME", "REVERB", "STREET"});
        t.set_pool("END1", Level::L1, {"NFIELD", "PRESTO", "TCAR", "OOFFICE"});
        t.set_pool("END1", Level::L2,
                   {"DKITCHEN", "NFIELD", "STRAFFIC", "PRESTO", "TCAR", "OOFFICE"});
        t.set_pool("END2", Level::L1, {"DLIVING", "OHALLWAY", "SPSQUARE", "TMETRO"});
        t.set_pool("END2", Level::L2,
                   {"DLIVING", "NRIVER", "OHALLWAY", "PSTATION", "SPSQUARE", "TMETRO"});
        t.set_pool("ENSC", Level::L1,
                   {"exercise_bike", "running_tap", "white_noise", "pink_noise"});
        t.set_pool("ENSC", Level::L2,
                   {"exercise_bike", "running_tap", "white_noise", "pink_noise",
                    "doing_the_dishes", "dude_miaowing"});
        return t;
    }

    std::string serialize() const {
        std::string out = "#dhauds corruption tables v1\n";
        out += "#grid,<family>,<level>,<value>...\n";
        for (const auto& [k, g] : grids_) {
            out += "grid," + to_string(g.family) + "," + to_string(g.level);
            for (const double v : g.values) out += "," + format_double(v);
            out += "\n";
        }
        out += "#pool,<corruption_id>,<level>,<noise_type>...\n";
        for (const auto& [k, p] : pools_) {
            out += "pool," + p.corruption_id + "," + to_string(p.level);
            for (const std::string& t : p.noise_types) out += "," + t;
            out += "\n";
        }
        return out;
    }

    static CorruptionTables parse(const std::vector<std::string>& lines) {
        CorruptionTables t;
        for (const std::string& raw : lines) {
            const std::string line = trim(raw);
            if (line.empty() || line[0] == '#') continue;
            const auto fields = split(line, ',');
            if (fields[0] == "grid") {
                if (fields.size() < 4) throw ConfigError("grid line needs at least one value");
                std::vector<double> vals;
                for (std::size_t i = 3; i < fields.size(); ++i)
                    vals.push_back(parse_double(fields[i], "grid line"));
                t.set_grid(parse_family(fields[1]), parse_level(fields[2]), std::move(vals));
            } else if (fields[0] == "pool") {
                if (fields.size() < 4) throw ConfigError("pool line needs at least one type");
                std::vector<std::string> types(fields.begin() + 3, fields.end());
                t.set_pool(fields[1], parse_level(fields[2]), std::move(types));
            } else {
                throw ConfigError("unknown tables line '" + line + "'");
            }
        }
        return t;
    }

    static CorruptionTables load(const std::filesystem::path& path) {
        return parse(read_lines(path));
    }

private:
    static std::string key(const std::string& id, Level l) { return id + "-" + to_string(l); }

    std::map<std::string, SeverityGrid> grids_;
    std::map<std::string, NoisePool> pools_;
};

/// Checks grid monotonicity, positivity rules, zero exclusion and L1/L2
/// containment for grids and pools. Failures are reported, not thrown.
inline ValidationReport validate_config(const CorruptionTables& t) {
    ValidationReport rep;

    for (const auto& [k, g] : t.grids()) {
        if (g.values.empty()) {
            rep.fail("grid " + k + ": empty");
            continue;
        }
        for (std::size_t i = 0; i < g.values.size(); ++i) {
            if (!std::isfinite(g.values[i])) rep.fail("grid " + k + ": non-finite value");
            if (i > 0 && g.values[i] <= g.values[i - 1]) {
                rep.fail("grid " + k + ": values not strictly ascending");
                break;
            }
        }
        if (g.family == Family::WHN || g.family == Family::EN) {
            for (const double v : g.values)
                if (v <= 0.0) {
                    rep.fail("grid " + k + ": SNR values must be positive dB");
                    break;
                }
        } else {
            for (const double v : g.values)
                if (v == 0.0) {
                    rep.fail("grid " + k + ": zero severity not allowed");
                    break;
                }
        }
    }

    for (const Family f : {Family::WHN, Family::EN, Family::TST, Family::PSH}) {
        const std::string l1 = to_string(f) + "-L1";
        if (!t.grids().count(l1) || !t.grids().count(to_string(f) + "-L2")) {
            rep.fail("grid " + to_string(f) + ": missing level");
            continue;
        }
        const auto& g1 = t.grid(f, Level::L1).values;
        const auto& g2 = t.grid(f, Level::L2).values;
        if (f == Family::WHN || f == Family::EN) {
            // SNR grids nest: every L1 value must appear in L2.
            for (const double v : g1)
                if (!std::binary_search(g2.begin(), g2.end(), v)) {
                    rep.fail("grid " + to_string(f) + ": L1 value " + format_double(v) +
                             " missing from L2");
                }
        } else if (!g1.empty() && !g2.empty()) {
            // TST/PSH levels shift to disjoint, stronger magnitudes; L2 only
            // has to reach at least as far out as L1.
            auto max_abs = [](const std::vector<double>& v) {
                double m = 0.0;
                for (const double x : v) m = std::max(m, std::abs(x));
                return m;
            };
            if (max_abs(g2) < max_abs(g1))
                rep.fail("grid " + to_string(f) + ": L2 magnitudes do not cover L1");
        }
    }

    for (const auto& [k, p] : t.pools()) {
        if (p.noise_types.empty()) rep.fail("pool " + k + ": empty");
    }
    std::set<std::string> pool_ids;
    for (const auto& [k, p] : t.pools()) pool_ids.insert(p.corruption_id);
    for (const std::string& id : pool_ids) {
        if (!t.has_pool(id, Level::L1) || !t.has_pool(id, Level::L2)) {
            rep.fail("pool " + id + ": missing level");
            continue;
        }
        const auto& p1 = t.pool(id, Level::L1).noise_types;
        const auto& p2 = t.pool(id, Level::L2).noise_types;
        for (const std::string& n : p1)
            if (!std::binary_search(p2.begin(), p2.end(), n))
                rep.fail("pool " + id + ": L1 type " + n + " missing from L2");
    }
    return rep;
}

}  // namespace dhauds
