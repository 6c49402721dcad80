#pragma once

#include <algorithm>
#include <cmath>

#include "critns/grid.hpp"

namespace testutil {

inline double max_diff(const critns::RealField& a, const critns::RealField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

// max |a - b| / max |b|
inline double rel_diff(const critns::RealField& a, const critns::RealField& b) {
    double s = b.max_abs();
    return s > 0.0 ? max_diff(a, b) / s : max_diff(a, b);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace testutil

#include <vector>

namespace testutil {

// Ratio of the |sum A|^p - sum |A|^p expansion defect to sum_{l != l'} |A_l||A_l'|^{p-1}.
inline double expansion_defect_ratio(const std::vector<double>& a, double p) {
    double sum = 0.0, powsum = 0.0, cross = 0.0;
    for (double x : a) {
        sum += x;
        powsum += std::pow(std::abs(x), p);
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < a.size(); ++k)
            if (i != k) cross += std::abs(a[i]) * std::pow(std::abs(a[k]), p - 1.0);
    double defect = std::abs(std::pow(std::abs(sum), p) - powsum);
    return cross > 0.0 ? defect / cross : 0.0;
}

}  // namespace testutil
