#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bcm/core_types.hpp"
#include "bcm/noise.hpp"

namespace bcm {

/// Which of the two probes of the connecting operator a trace answers.
enum class ProbeKind { direct, reversed };

inline std::string to_string(ProbeKind k) { return k == ProbeKind::direct ? "direct" : "reversed"; }

inline ProbeKind probe_kind_from_string(const std::string& s)
{
    if (s == "direct")
        return ProbeKind::direct;
    if (s == "reversed")
        return ProbeKind::reversed;
    throw ParseError("unknown probe kind '" + s + "'");
}

/// Control id used in archives and caches, e.g. "7:reversed".
inline std::string probe_key(int basis_index, ProbeKind kind)
{
    return std::to_string(basis_index) + ":" + to_string(kind);
}

struct ArchiveEntry
{
    int basis_index = 0;
    ProbeKind probe = ProbeKind::direct;
    double lambda = 0.0;
    NoiseSpec noise;
    BoundarySignal trace;
};

/// Measured boundary responses keyed by control id.
struct TraceArchive
{
    std::map<std::string, ArchiveEntry> entries;
    std::string mode = "synthetic-linearized";
    int basis_n = 0;
    int bump_p = 2;
    double a = -1.0, b = 1.0, T = 5.0;
    std::size_t nx = 0, nt = 0;

    bool empty() const noexcept { return entries.empty(); }

    const ArchiveEntry* find(const std::string& key) const
    {
        auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    }
};

namespace detail {

inline void write_number(std::ostream& os, double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

inline double parse_number(std::string_view field, long line)
{
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
        field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
        field.remove_suffix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw ParseError("invalid number '" + std::string(field) + "'", line);
    return v;
}

inline std::string file_name_for(const std::string& key)
{
    std::string name = key;
    for (auto& c : name)
        if (c == ':')
            c = '_';
    return name + ".csv";
}

} // namespace detail

/// CSV with header "t,left,right", one row per time sample, 17 significant digits.
inline void write_trace_csv(const BoundarySignal& s, const std::filesystem::path& path)
{
    std::ofstream os(path);
    if (!os)
        throw IoError("cannot open '" + path.string() + "' for writing");
    os << "t,left,right\n";
    for (std::size_t k = 0; k < s.size(); ++k)
    {
        detail::write_number(os, s.t0 + static_cast<double>(k) * s.dt);
        os << ',';
        detail::write_number(os, s.left[k]);
        os << ',';
        detail::write_number(os, s.right[k]);
        os << '\n';
    }
    if (!os)
        throw IoError("write failed for '" + path.string() + "'");
}

/// Reads a trace CSV; dt is recovered from the first two rows unless given.
inline BoundarySignal read_trace_csv(const std::filesystem::path& path, double dt = 0.0)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    long lineno = 1;
    if (!std::getline(is, line))
        throw ParseError(path.string() + ": empty file", lineno);
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "t,left,right")
        throw ParseError(path.string() + ": expected header 't,left,right'", lineno);
    BoundarySignal s;
    std::vector<double> times;
    while (std::getline(is, line))
    {
        ++lineno;
        if (line.empty() || line == "\r")
            continue;
        std::string_view view(line);
        const auto c1 = view.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : view.find(',', c1 + 1);
        if (c2 == std::string_view::npos || view.find(',', c2 + 1) != std::string_view::npos)
            throw ParseError(path.string() + ": expected 3 columns", lineno);
        times.push_back(detail::parse_number(view.substr(0, c1), lineno));
        s.left.push_back(detail::parse_number(view.substr(c1 + 1, c2 - c1 - 1), lineno));
        s.right.push_back(detail::parse_number(view.substr(c2 + 1), lineno));
    }
    if (times.empty())
        throw ParseError(path.string() + ": no samples", lineno);
    s.t0 = times.front();
    s.dt = dt > 0.0 ? dt : (times.size() > 1 ? times[1] - times[0] : 0.0);
    return s;
}

inline nlohmann::json to_json(const NoiseSpec& n)
{
    return {{"level", n.level}, {"target", to_string(n.target)}, {"seed", n.seed}};
}

inline NoiseSpec noise_from_json(const nlohmann::json& j)
{
    NoiseSpec n;
    n.level = j.value("level", 0.0);
    n.target = noise_target_from_string(j.value("target", std::string("none")));
    n.seed = j.value("seed", std::uint64_t{0});
    return n;
}

/// Writes <dir>/manifest.json and one CSV per control id.
inline void write_trace_archive(const TraceArchive& archive, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
    nlohmann::json manifest;
    manifest["format"] = "bcm-trace-archive";
    manifest["version"] = 1;
    manifest["mode"] = archive.mode;
    manifest["basis_n"] = archive.basis_n;
    manifest["p"] = archive.bump_p;
    manifest["grid"] = {{"a", archive.a}, {"b", archive.b}, {"T", archive.T}, {"nx", archive.nx}, {"nt", archive.nt}};
    manifest["controls"] = nlohmann::json::array();
    for (const auto& [key, e] : archive.entries)
    {
        const auto file = detail::file_name_for(key);
        write_trace_csv(e.trace, dir / file);
        manifest["controls"].push_back({{"id", key},
                                        {"basis_index", e.basis_index},
                                        {"probe", to_string(e.probe)},
                                        {"lambda", e.lambda},
                                        {"dt", e.trace.dt},
                                        {"noise", to_json(e.noise)},
                                        {"file", file}});
    }
    std::ofstream os(dir / "manifest.json");
    if (!os)
        throw IoError("cannot write manifest in '" + dir.string() + "'");
    os << manifest.dump(2) << '\n';
}

inline TraceArchive read_trace_archive(const std::filesystem::path& dir)
{
    const auto manifest_path = dir / "manifest.json";
    std::ifstream is(manifest_path);
    if (!is)
        throw IoError("cannot open '" + manifest_path.string() + "'");
    nlohmann::json m;
    try
    {
        m = nlohmann::json::parse(is);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw ParseError(manifest_path.string() + ": " + e.what());
    }
    TraceArchive archive;
    try
    {
        archive.mode = m.value("mode", std::string("file"));
        archive.basis_n = m.value("basis_n", 0);
        archive.bump_p = m.value("p", 2);
        const auto& g = m.at("grid");
        archive.a = g.at("a").get<double>();
        archive.b = g.at("b").get<double>();
        archive.T = g.at("T").get<double>();
        archive.nx = g.at("nx").get<std::size_t>();
        archive.nt = g.at("nt").get<std::size_t>();
        for (const auto& c : m.at("controls"))
        {
            ArchiveEntry e;
            e.basis_index = c.at("basis_index").get<int>();
            e.probe = probe_kind_from_string(c.at("probe").get<std::string>());
            e.lambda = c.at("lambda").get<double>();
            if (c.contains("noise"))
                e.noise = noise_from_json(c.at("noise"));
            e.trace = read_trace_csv(dir / c.at("file").get<std::string>(), c.value("dt", 0.0));
            archive.entries.emplace(c.at("id").get<std::string>(), std::move(e));
        }
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ParseError(manifest_path.string() + ": " + e.what());
    }
    return archive;
}

} // namespace bcm
