#include "critns/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace critns {

const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Completed: return "Completed";
        case RunStatus::ResolutionLimit: return "ResolutionLimit";
        case RunStatus::NonFinite: return "NonFinite";
    }
    return "Unknown";
}

RunStatus run_status_from_string(const std::string& s) {
    if (s == "Completed") return RunStatus::Completed;
    if (s == "ResolutionLimit") return RunStatus::ResolutionLimit;
    if (s == "NonFinite") return RunStatus::NonFinite;
    throw FormatError("unknown run status: " + s);
}

const Grid& Trajectory::grid() const {
    if (snapshots.empty()) throw CoverageError("trajectory has no snapshots");
    return snapshots.front().grid();
}

void Trajectory::push(double t, RealField f) {
    if (!times.empty()) {
        if (!(t > times.back())) throw DomainError("trajectory times must be strictly increasing");
        f.require_same_shape(snapshots.front(), "trajectory push");
    }
    times.push_back(t);
    snapshots.push_back(std::move(f));
}

bool Trajectory::covers(double t, double tol) const {
    if (times.empty()) return false;
    double scale = std::max(1.0, std::abs(times.back()));
    return t >= times.front() - tol * scale && t <= times.back() + tol * scale;
}

RealField Trajectory::at(double t, double tol) const {
    if (!covers(t, tol)) throw CoverageError("trajectory does not cover requested time");
    double scale = std::max(1.0, std::abs(times.back()));
    auto it = std::lower_bound(times.begin(), times.end(), t - tol * scale);
    std::size_t i = static_cast<std::size_t>(it - times.begin());
    if (i < times.size() && std::abs(times[i] - t) <= tol * scale) return snapshots[i];
    if (i == 0) return snapshots.front();
    if (i >= times.size()) return snapshots.back();
    double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
    RealField out = snapshots[i - 1];
    out *= (1.0 - w);
    out.axpy(w, snapshots[i]);
    return out;
}

Trajectory restrict(const Trajectory& tr, double a, double b, double tol) {
    Trajectory out;
    double scale = std::max(1.0, std::abs(b));
    for (std::size_t i = 0; i < tr.size(); ++i)
        if (tr.times[i] >= a - tol * scale && tr.times[i] <= b + tol * scale)
            out.push(tr.times[i], tr.snapshots[i]);
    out.status = tr.status;
    out.end_time = std::min(tr.end_time, b);
    return out;
}

}  // namespace critns
