#include "critns/trajectory_io.hpp"

#include <cmath>
#include <fstream>

#include "critns/field_io.hpp"

namespace critns {

namespace fs = std::filesystem;
using nlohmann::json;

json json_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    return v;
}

double json_to_double(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") return INFINITY;
        if (s == "-inf") return -INFINITY;
        if (s == "nan") return NAN;
    }
    throw FormatError("expected a number, got " + j.dump());
}

void save_trajectory(const Trajectory& tr, const fs::path& dir, const json& config_echo) {
    fs::create_directories(dir);
    json m;
    m["config"] = config_echo;
    m["status"] = to_string(tr.status);
    m["end_time"] = tr.end_time;
    m["detail"] = tr.detail;
    m["times"] = tr.times;
    json files = json::array();
    for (std::size_t i = 0; i < tr.size(); ++i) {
        std::string name = "snap_" + std::to_string(i) + ".cfd";
        write_cfd(tr.snapshots[i], dir / name);
        files.push_back(name);
    }
    m["snapshots"] = files;
    json rec = json::object();
    rec["time"] = tr.record_times;
    for (const auto& [k, v] : tr.records) {
        json arr = json::array();
        for (double x : v) arr.push_back(json_number(x));
        rec[k] = arr;
    }
    m["records"] = rec;
    std::ofstream os(dir / "manifest.json");
    if (!os) throw FormatError("cannot write " + (dir / "manifest.json").string());
    os << m.dump(2) << '\n';
}

Trajectory load_trajectory(const fs::path& dir) {
    std::ifstream is(dir / "manifest.json");
    if (!is) throw FormatError("missing manifest.json in " + dir.string());
    json m;
    try {
        m = json::parse(is);
    } catch (const json::exception& e) {
        throw FormatError(std::string("manifest.json: ") + e.what());
    }
    Trajectory tr;
    try {
        auto times = m.at("times").get<std::vector<double>>();
        auto files = m.at("snapshots").get<std::vector<std::string>>();
        if (times.size() != files.size()) throw FormatError("manifest: times and snapshots differ in length");
        for (std::size_t i = 0; i < times.size(); ++i) tr.push(times[i], read_cfd(dir / files[i]));
        tr.status = run_status_from_string(m.at("status").get<std::string>());
        tr.end_time = m.at("end_time").get<double>();
        tr.detail = m.value("detail", "");
        if (m.contains("records")) {
            for (const auto& [k, v] : m["records"].items()) {
                if (k == "time") {
                    tr.record_times = v.get<std::vector<double>>();
                    continue;
                }
                auto& dst = tr.records[k];
                for (const auto& x : v) dst.push_back(json_to_double(x));
            }
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("manifest.json: ") + e.what());
    }
    return tr;
}

}  // namespace critns
