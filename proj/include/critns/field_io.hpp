#pragma once

#include <filesystem>
#include <iosfwd>

#include "critns/grid.hpp"

namespace critns {

// CFD1: "CFD1 d=<d> N=<N> L=<float> C=<components>\n" + little-endian float64 samples.
void write_cfd(const RealField& f, std::ostream& os);
void write_cfd(const RealField& f, const std::filesystem::path& path);
RealField read_cfd(std::istream& is);
RealField read_cfd(const std::filesystem::path& path);

}  // namespace critns
