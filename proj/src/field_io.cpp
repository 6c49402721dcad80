#include "critns/field_io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace critns {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
    return v;
}

std::string format_length(double l) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, l);
    return std::string(buf, res.ptr);
}

int parse_int_field(const std::string& tok, const char* key) {
    std::string prefix = std::string(key) + "=";
    if (tok.rfind(prefix, 0) != 0) throw FormatError("CFD1 header: expected " + prefix);
    std::string v = tok.substr(prefix.size());
    int out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw FormatError("CFD1 header: bad value for " + std::string(key));
    return out;
}

}  // namespace

void write_cfd(const RealField& f, std::ostream& os) {
    const Grid& g = f.grid();
    os << "CFD1 d=" << g.dim() << " N=" << g.n() << " L=" << format_length(g.length())
       << " C=" << f.components() << "\n";
    std::vector<std::uint64_t> buf(f.data().size());
    for (std::size_t i = 0; i < buf.size(); ++i)
        buf[i] = to_le(std::bit_cast<std::uint64_t>(f.data()[i]));
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(std::uint64_t)));
    if (!os) throw FormatError("CFD1 write failed");
}

void write_cfd(const RealField& f, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + path.string());
    write_cfd(f, os);
}

RealField read_cfd(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw FormatError("CFD1: missing header");
    std::istringstream hs(header);
    std::string magic, td, tn, tl, tc, extra;
    hs >> magic >> td >> tn >> tl >> tc;
    if (magic != "CFD1") throw FormatError("not a CFD1 file (bad magic)");
    if (hs >> extra) throw FormatError("CFD1 header: trailing tokens");
    int d = parse_int_field(td, "d");
    int n = parse_int_field(tn, "N");
    int c = parse_int_field(tc, "C");
    if (tl.rfind("L=", 0) != 0) throw FormatError("CFD1 header: expected L=");
    std::string lv = tl.substr(2);
    double l = 0.0;
    auto res = std::from_chars(lv.data(), lv.data() + lv.size(), l);
    if (res.ec != std::errc() || res.ptr != lv.data() + lv.size())
        throw FormatError("CFD1 header: bad value for L");
    if (c < 1) throw FormatError("CFD1 header: bad component count");
    Grid g(d, n, l);
    std::vector<std::uint64_t> buf(g.points() * c);
    is.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(std::uint64_t)));
    if (static_cast<std::size_t>(is.gcount()) != buf.size() * sizeof(std::uint64_t))
        throw FormatError("CFD1: truncated sample data");
    std::vector<double> data(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i) data[i] = std::bit_cast<double>(to_le(buf[i]));
    RealField f(g, c, std::move(data));
    f.require_finite("read_cfd");
    return f;
}

RealField read_cfd(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open: " + path.string());
    return read_cfd(is);
}

}  // namespace critns
