#pragma once

#include <map>
#include <string>
#include <vector>

#include "critns/grid.hpp"

namespace critns {

enum class RunStatus { Completed, ResolutionLimit, NonFinite };

const char* to_string(RunStatus s);
RunStatus run_status_from_string(const std::string& s);

// Time-indexed snapshots plus per-step scalar records.
struct Trajectory {
    std::vector<double> times;
    std::vector<RealField> snapshots;
    std::vector<double> record_times;
    std::map<std::string, std::vector<double>> records;
    RunStatus status = RunStatus::Completed;
    double end_time = 0.0;  // last time reached by the stepper
    std::string detail;

    bool empty() const { return snapshots.empty(); }
    std::size_t size() const { return snapshots.size(); }
    const Grid& grid() const;
    double start() const { return times.front(); }
    double finish() const { return times.back(); }

    void push(double t, RealField f);
    // Snapshot at t: exact match within `tol`, otherwise linear interpolation.
    RealField at(double t, double tol = 1e-12) const;
    bool covers(double t, double tol = 1e-12) const;
};

// Snapshots restricted to [a, b] (inclusive within tolerance).
Trajectory restrict(const Trajectory& tr, double a, double b, double tol = 1e-12);

}  // namespace critns
