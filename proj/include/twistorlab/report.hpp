#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "twistorlab/homology.hpp"
#include "twistorlab/lattice.hpp"

// Machine-readable command reports and the JSON wire forms of the algebraic
// types. Reports serialize with a fixed field order; a command run twice with
// identical inputs and seed emits byte-identical JSON.
namespace twistorlab::report {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "twistorlab 1.0.0";

struct Report {
    std::string command;
    Json inputs = Json::object();
    std::vector<Json> rows;
    Json summary = Json::object();
    std::uint64_t seed = 0;

    Json to_json() const {
        Json j = Json::object();
        j["command"] = command;
        j["tool_version"] = kToolVersion;
        j["seed"] = seed;
        j["inputs"] = inputs;
        j["rows"] = rows;
        j["summary"] = summary;
        return j;
    }

    std::string to_json_string() const { return to_json().dump(2) + "\n"; }

    // Lossy projection: one line per row, columns from the first row's keys.
    std::string to_csv() const {
        std::string out;
        auto cell = [](const Json& v) {
            std::string s = v.is_string() ? v.get<std::string>() : v.dump();
            if (s.find_first_of(",\"\n") == std::string::npos) return s;
            std::string quoted = "\"";
            for (char c : s) {
                if (c == '"') quoted += '"';
                quoted += c;
            }
            quoted += '"';
            return quoted;
        };
        if (rows.empty()) return out;
        bool first = true;
        for (const auto& [key, value] : rows.front().items()) {
            (void)value;
            if (!first) out += ',';
            out += cell(Json(key));
            first = false;
        }
        out += '\n';
        for (const Json& row : rows) {
            first = true;
            for (const auto& [key, value] : row.items()) {
                (void)key;
                if (!first) out += ',';
                out += cell(value);
                first = false;
            }
            out += '\n';
        }
        return out;
    }
};

inline Json group_json(const homology::AbelianGroup& g) {
    Json j = Json::object();
    j["rank"] = g.rank;
    Json tor = Json::array();
    for (const homology::BigInt& d : g.torsion) tor.push_back(static_cast<std::int64_t>(d));
    j["torsion"] = tor;
    return j;
}

inline homology::AbelianGroup group_from_json(const Json& j) {
    homology::AbelianGroup g;
    g.rank = j.at("rank").get<int>();
    if (j.contains("torsion"))
        for (const Json& d : j.at("torsion"))
            g.torsion.push_back(homology::BigInt(d.get<std::int64_t>()));
    if (!g.is_chain() || g.rank < 0)
        throw homology::HomologyError("group is not in invariant-factor normal form");
    return g;
}

inline Json manifold_json(const homology::ManifoldHomology& m) {
    Json j = Json::object();
    Json h = Json::array();
    for (const auto& g : m.h) h.push_back(group_json(g));
    j["H"] = h;
    j["euler_class_zero"] = m.euler_class_zero;
    j["two_torsion_witness"] =
        m.two_torsion_witness.has_value() ? Json(*m.two_torsion_witness) : Json(nullptr);
    return j;
}

inline homology::ManifoldHomology manifold_from_json(const Json& j) {
    homology::ManifoldHomology m;
    const Json& h = j.at("H");
    if (!h.is_array() || h.size() != 5)
        throw homology::HomologyError("homology input needs exactly the five groups H^0..H^4");
    for (std::size_t k = 0; k < 5; ++k) m.h[k] = group_from_json(h[k]);
    m.euler_class_zero = j.value("euler_class_zero", true);
    if (j.contains("two_torsion_witness") && !j.at("two_torsion_witness").is_null())
        m.two_torsion_witness = j.at("two_torsion_witness").get<int>();
    m.validate();
    return m;
}

inline Json bundle_json(const homology::SphereBundleHomology& z) {
    Json j = Json::object();
    Json h = Json::array();
    for (const auto& g : z.hz) h.push_back(group_json(g));
    j["H"] = h;
    j["fiber_pairing_generator_exists"] = z.fiber_pairing_generator_exists;
    return j;
}

inline Json lattice_json(const lattice::IntersectionLattice& lat) {
    Json j = Json::object();
    Json gram = Json::array();
    for (int r = 0; r < lat.gram.rows; ++r) {
        Json row = Json::array();
        for (int c = 0; c < lat.gram.cols; ++c)
            row.push_back(static_cast<std::int64_t>(lat.gram.at(r, c)));
        gram.push_back(row);
    }
    j["gram"] = gram;
    j["b1"] = lat.b1;
    j["w2"] = lat.w2;
    return j;
}

inline lattice::IntersectionLattice lattice_from_json(const Json& j) {
    const Json& gram = j.at("gram");
    int n = static_cast<int>(gram.size());
    homology::IntMat m(n, n);
    for (int r = 0; r < n; ++r) {
        const Json& row = gram[static_cast<std::size_t>(r)];
        if (static_cast<int>(row.size()) != n)
            throw lattice::LatticeError("pairing matrix must be square");
        for (int c = 0; c < n; ++c)
            m.at(r, c) = homology::BigInt(row[static_cast<std::size_t>(c)].get<std::int64_t>());
    }
    lattice::IntersectionLattice lat;
    lat.gram = std::move(m);
    lat.b1 = j.value("b1", 0);
    if (j.contains("w2")) {
        for (const Json& b : j.at("w2")) lat.w2.push_back(b.get<int>());
        lat.validate();
        return lat;
    }
    return lattice::IntersectionLattice::from_gram(std::move(lat.gram), lat.b1);
}

}  // namespace twistorlab::report
