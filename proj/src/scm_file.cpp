#include "ccshap/scm_file.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ccshap/errors.hpp"
#include "ccshap/util.hpp"

namespace ccshap {

namespace {

using nlohmann::json;

std::string field_string(const json& node, const char* key, const std::string& where) {
    if (!node.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
    if (!node[key].is_string()) throw ParseError(where + ": field '" + key + "' must be a string");
    return node[key].get<std::string>();
}

Mechanism parse_mechanism(const std::string& name, std::string_view text, const json& node) {
    const auto t = trim(text);
    const bool has_noise = node.contains("noise") && !node["noise"].is_null();
    auto noise = [&] {
        if (!node["noise"].is_string()) throw ParseError("node '" + name + "': 'noise' must be a string");
        return NoiseSpec::parse(node["noise"].get<std::string>());
    };
    if (t.starts_with("exogenous")) {
        if (has_noise) throw ParseError("node '" + name + "': exogenous mechanisms carry their noise inline");
        return mech::Exogenous{NoiseSpec::parse(t.substr(9))};
    }
    if (t.starts_with("bernoulli(") && t.ends_with(")")) {
        // Only when the outer parentheses enclose the whole remainder.
        int depth = 0;
        bool whole = true;
        for (std::size_t i = 9; i < t.size(); ++i) {
            if (t[i] == '(') ++depth;
            if (t[i] == ')' && --depth == 0 && i + 1 != t.size()) whole = false;
        }
        if (whole) {
            if (has_noise) throw ParseError("node '" + name + "': bernoulli mechanisms take no noise");
            return mech::Bernoulli{Expression::parse(t.substr(10, t.size() - 11))};
        }
    }
    auto expr = Expression::parse(t);
    if (expr.uses_noise() && !has_noise)
        throw ParseError("node '" + name + "': mechanism uses U but no 'noise' is given");
    return mech::Deterministic{std::move(expr), has_noise ? std::optional<NoiseSpec>(noise()) : std::nullopt};
}

} // namespace

Scm parse_scm(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("SCM file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("SCM file must be a JSON object");
    const auto target = field_string(doc, "target", "SCM file");
    if (!doc.contains("nodes") || !doc["nodes"].is_array() || doc["nodes"].empty())
        throw ParseError("SCM file: 'nodes' must be a non-empty list");

    std::vector<std::string> names;
    std::vector<Edge> edges;
    std::vector<std::pair<std::string, Mechanism>> mechanisms;
    for (const auto& node : doc["nodes"]) {
        if (!node.is_object()) throw ParseError("SCM file: every node must be an object");
        const auto name = field_string(node, "name", "node");
        const auto where = "node '" + name + "'";
        names.push_back(name);
        if (node.contains("parents")) {
            if (!node["parents"].is_array()) throw ParseError(where + ": 'parents' must be a list");
            for (const auto& p : node["parents"]) {
                if (!p.is_string()) throw ParseError(where + ": parent names must be strings");
                edges.push_back({p.get<std::string>(), name});
            }
        }
        mechanisms.emplace_back(name, parse_mechanism(name, field_string(node, "mechanism", where), node));
    }
    CausalGraph g(names, edges, target);
    std::map<std::string, Mechanism, std::less<>> by_name;
    for (auto& [name, m] : mechanisms) by_name.insert_or_assign(name, std::move(m));
    return Scm(std::move(g), std::move(by_name));
}

Scm load_scm(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open SCM file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scm(ss.str());
}

std::string scm_to_json(const Scm& m) {
    const auto& g = m.graph();
    json doc;
    doc["target"] = g.target();
    doc["nodes"] = json::array();
    for (const auto& name : g.nodes()) {
        json node;
        node["name"] = name;
        node["parents"] = g.parents(name);
        const auto& mech = m.mechanism(name);
        if (const auto* e = std::get_if<mech::Exogenous>(&mech)) {
            node["mechanism"] = "exogenous " + e->noise.to_string();
        } else if (const auto* d = std::get_if<mech::Deterministic>(&mech)) {
            node["mechanism"] = d->expr.text();
            if (d->noise) node["noise"] = d->noise->to_string();
        } else if (const auto* b = std::get_if<mech::Bernoulli>(&mech)) {
            node["mechanism"] = "bernoulli(" + b->prob.text() + ")";
        } else if (const auto* c = std::get_if<mech::Constant>(&mech)) {
            node["mechanism"] = format_double(c->value);
        } else {
            throw ArgumentError("node '" + name + "' has a mechanism that the SCM file format cannot express");
        }
        doc["nodes"].push_back(std::move(node));
    }
    return doc.dump(2) + "\n";
}

} // namespace ccshap
