#include "msfem/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "msfem/error.hpp"

namespace msfem {

using nlohmann::json;

std::vector<double> RunConfig::output_times() const
{
    std::vector<double> out = transport.output_times;
    if (transport.scale_times) {
        const double s = (n / 200.0) * (n / 200.0);
        for (double& t : out)
            t *= s;
    }
    return out;
}

namespace {

/// Reads fields of one JSON object, collecting problems instead of
/// stopping at the first.
class Section {
public:
    Section(const json& node, std::string prefix, std::vector<std::string>& errors)
        : node_(node), prefix_(std::move(prefix)), errors_(errors)
    {
        if (!node_.is_object())
            fail("", "must be an object");
    }

    ~Section()
    {
        if (!node_.is_object())
            return;
        for (const auto& item : node_.items())
            if (!seen_.count(item.key()))
                fail(item.key(), "is not a known setting");
    }

    template <class T>
    void get(const std::string& key, T& target)
    {
        seen_.insert(key);
        if (!node_.is_object() || !node_.contains(key))
            return;
        try {
            target = node_.at(key).get<T>();
        } catch (const json::exception&) {
            fail(key, "has the wrong type");
        }
    }

    bool has(const std::string& key) const { return node_.is_object() && node_.contains(key); }
    const json& child(const std::string& key)
    {
        seen_.insert(key);
        return node_.at(key);
    }
    std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

    void fail(const std::string& key, const std::string& what)
    {
        errors_.push_back((key.empty() ? (prefix_.empty() ? std::string("config") : prefix_) : path(key)) +
                          " " + what);
    }

private:
    const json& node_;
    std::string prefix_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
};

void check_dofs(const std::vector<int>& dofs, int ratio, const std::string& name,
                std::vector<std::string>& errors)
{
    if (dofs.empty())
        errors.push_back(name + " must not be empty");
    for (int d : dofs)
        if (d < 1 || d > ratio) {
            errors.push_back(name + " entries must lie in [1, n/N = " + std::to_string(ratio) +
                             "] (got " + std::to_string(d) + ")");
            break;
        }
}

} // namespace

RunConfig parse_config(const std::string& json_text)
{
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    RunConfig c;
    std::vector<std::string> errors;
    std::string spectral = to_string(c.spectral);
    {
        Section top(root, "", errors);
        top.get("n", c.n);
        top.get("N", c.N);
        top.get("seed", c.seed);
        top.get("source", c.source);
        top.get("spectral", spectral);
        top.get("dofs", c.dofs);
        top.get("multiplicity_tolerance", c.multiplicity_tolerance);
        top.get("postprocess", c.postprocess);
        top.get("force_all", c.force_all);
        top.get("threads", c.threads);
        top.get("write_fields", c.write_fields);
        if (top.has("perm") && root.at("perm").is_string()) {
            top.get("perm", c.perm.kind);
        } else if (top.has("perm")) {
            Section s(top.child("perm"), "perm", errors);
            s.get("kind", c.perm.kind);
            s.get("contrast", c.perm.contrast);
            s.get("epsilon", c.perm.epsilon);
            s.get("value", c.perm.value);
            s.get("path", c.perm.path);
            s.get("layer", c.perm.layer);
        }
        if (top.has("oversample")) {
            Section s(top.child("oversample"), "oversample", errors);
            s.get("layers", c.oversample.layers);
            s.get("case2_modes", c.oversample.case2_modes);
            s.get("dofs", c.oversample.dofs);
        }
        if (top.has("transport")) {
            Section s(top.child("transport"), "transport", errors);
            s.get("cfl", c.transport.cfl);
            s.get("output_times", c.transport.output_times);
            s.get("scale_times", c.transport.scale_times);
            s.get("pressure_cadence", c.transport.pressure_cadence);
            s.get("max_steps", c.transport.max_steps);
            s.get("dofs", c.transport.dofs);
            s.get("postprocess", c.transport.postprocess);
        }
    }

    if (c.n < 2 || c.N < 2)
        errors.push_back("n and N must be at least 2 (got n = " + std::to_string(c.n) +
                         ", N = " + std::to_string(c.N) + ")");
    else if (c.n % c.N != 0 || c.n / c.N < 2)
        errors.push_back("n must be a multiple of N with n/N >= 2 (got n = " + std::to_string(c.n) +
                         ", N = " + std::to_string(c.N) + ")");
    const int ratio = (c.N > 0 && c.n % c.N == 0) ? c.n / c.N : 1;

    try {
        c.spectral = spectral_kind_from_string(spectral);
    } catch (const ConfigError& e) {
        errors.push_back(std::string("spectral: ") + e.what());
    }
    if (c.source != "corner" && c.source != "corner_blocks" && c.source != "blocks")
        errors.push_back("source must be corner, corner_blocks or blocks (got \"" + c.source + "\")");
    check_dofs(c.dofs, ratio, "dofs", errors);
    if (!(c.multiplicity_tolerance > 0.0))
        errors.push_back("multiplicity_tolerance must be positive");
    if (c.threads < 0)
        errors.push_back("threads must be >= 0");

    const auto& p = c.perm;
    if (p.kind != "synthetic" && p.kind != "periodic" && p.kind != "file" && p.kind != "constant")
        errors.push_back("perm.kind must be synthetic, periodic, file or constant (got \"" + p.kind + "\")");
    if (!(p.contrast >= 1.0))
        errors.push_back("perm.contrast must be >= 1");
    if (!(p.epsilon > 0.0))
        errors.push_back("perm.epsilon must be positive");
    if (!(p.value > 0.0))
        errors.push_back("perm.value must be positive");
    if (p.kind == "file" && p.path.empty())
        errors.push_back("perm.path is required for perm.kind = file");
    if (p.layer < 0)
        errors.push_back("perm.layer must be >= 0");

    if (c.oversample.layers < 0)
        errors.push_back("oversample.layers must be >= 0 (0 selects n/N/2)");
    if (c.oversample.case2_modes < 1 || c.oversample.case2_modes > ratio)
        errors.push_back("oversample.case2_modes must lie in [1, n/N]");
    check_dofs(c.oversample.dofs, ratio, "oversample.dofs", errors);

    const auto& t = c.transport;
    if (!(t.cfl > 0.0 && t.cfl <= 1.0))
        errors.push_back("transport.cfl must lie in (0, 1]");
    if (t.output_times.empty())
        errors.push_back("transport.output_times must not be empty");
    for (std::size_t k = 0; k < t.output_times.size(); ++k)
        if (!(t.output_times[k] > 0.0) || (k > 0 && t.output_times[k] <= t.output_times[k - 1])) {
            errors.push_back("transport.output_times must be positive and strictly ascending");
            break;
        }
    if (t.pressure_cadence < 1)
        errors.push_back("transport.pressure_cadence must be >= 1");
    if (t.max_steps < 0)
        errors.push_back("transport.max_steps must be >= 0");
    check_dofs(t.dofs, ratio, "transport.dofs", errors);

    if (!errors.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : errors)
            msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string to_json(const RunConfig& c)
{
    json j;
    j["n"] = c.n;
    j["N"] = c.N;
    j["seed"] = c.seed;
    j["source"] = c.source;
    j["spectral"] = to_string(c.spectral);
    j["dofs"] = c.dofs;
    j["multiplicity_tolerance"] = c.multiplicity_tolerance;
    j["postprocess"] = c.postprocess;
    j["force_all"] = c.force_all;
    j["threads"] = c.threads;
    j["write_fields"] = c.write_fields;
    j["perm"] = {{"kind", c.perm.kind},       {"contrast", c.perm.contrast},
                 {"epsilon", c.perm.epsilon}, {"value", c.perm.value},
                 {"path", c.perm.path},       {"layer", c.perm.layer}};
    j["oversample"] = {{"layers", c.oversample.layers},
                       {"case2_modes", c.oversample.case2_modes},
                       {"dofs", c.oversample.dofs}};
    j["transport"] = {{"cfl", c.transport.cfl},
                      {"output_times", c.transport.output_times},
                      {"scale_times", c.transport.scale_times},
                      {"pressure_cadence", c.transport.pressure_cadence},
                      {"max_steps", c.transport.max_steps},
                      {"dofs", c.transport.dofs},
                      {"postprocess", c.transport.postprocess}};
    return j.dump(2);
}

std::string fnv1a_hex(const std::string& bytes)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace msfem
