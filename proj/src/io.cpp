#include "inls/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace inls::io {

static_assert(std::endian::native == std::endian::little, "snapshot format assumes a little-endian host");

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& contents) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_field_csv(const std::filesystem::path& path, const RadialField& f) {
    std::ostringstream s;
    s << "r,re,im\n";
    for (int j = 0; j < f.grid->M; ++j)
        s << fmt(f.grid->r[j]) << ',' << fmt(f.values[j].real()) << ',' << fmt(f.values[j].imag()) << '\n';
    write_text_atomic(path, s.str());
}

RadialField read_field_csv(const std::filesystem::path& path, int N) {
    std::ifstream in(path);
    if (!in) throw FileFormat("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("r,re,im", 0) != 0) throw FileFormat("missing r,re,im header");
    std::vector<double> r, re, im;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double a, b, c;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &b, &c) != 3) throw FileFormat("bad CSV row: " + line);
        r.push_back(a);
        re.push_back(b);
        im.push_back(c);
    }
    if (r.size() < 2) throw FileFormat("too few rows");
    const double dr = r[1] - r[0];
    const int M = static_cast<int>(r.size());
    const GridPtr g = make_grid(M, dr * M, N);
    for (int j = 0; j < M; ++j)
        if (std::abs(g->r[j] - r[j]) > 1e-9 * g->r_max) throw FileFormat("nodes are not a cell-centred grid");
    Eigen::VectorXcd v(M);
    for (int j = 0; j < M; ++j) v[j] = {re[j], im[j]};
    return RadialField(g, v);
}

void write_snapshot(const std::filesystem::path& path, const RadialField& f) {
    std::string buf;
    auto put = [&](const void* p, size_t n) { buf.append(static_cast<const char*>(p), n); };
    const std::int64_t M = f.grid->M, N = f.grid->N;
    const double r_max = f.grid->r_max;
    put(&M, 8);
    put(&r_max, 8);
    put(&N, 8);
    for (int j = 0; j < f.grid->M; ++j) {
        const double re = f.values[j].real(), im = f.values[j].imag();
        put(&re, 8);
        put(&im, 8);
    }
    write_text_atomic(path, buf);
}

RadialField read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileFormat("cannot open " + path.string());
    std::int64_t M = 0, N = 0;
    double r_max = 0.0;
    in.read(reinterpret_cast<char*>(&M), 8);
    in.read(reinterpret_cast<char*>(&r_max), 8);
    in.read(reinterpret_cast<char*>(&N), 8);
    if (!in || M < 16 || M > (1 << 24) || N < 1 || N > 64 || !(r_max > 0.0)) throw FileFormat("bad snapshot header");
    const GridPtr g = make_grid(static_cast<int>(M), r_max, static_cast<int>(N));
    Eigen::VectorXcd v(M);
    for (std::int64_t j = 0; j < M; ++j) {
        double re, im;
        in.read(reinterpret_cast<char*>(&re), 8);
        in.read(reinterpret_cast<char*>(&im), 8);
        if (!in) throw FileFormat("truncated snapshot");
        v[j] = {re, im};
    }
    if (in.peek() != std::char_traits<char>::eof()) throw FileFormat("trailing bytes in snapshot");
    return RadialField(g, v);
}

void write_series_csv(const std::filesystem::path& path, const Trajectory& traj) {
    std::ostringstream s;
    s << "t,mass,kinetic,potential,energy,virial,action,sup_norm,morawetz,dt\n";
    for (const auto& d : traj.series)
        s << fmt(d.time) << ',' << fmt(d.mass) << ',' << fmt(d.kinetic) << ',' << fmt(d.potential) << ','
          << fmt(d.energy) << ',' << fmt(d.virial) << ',' << fmt(d.action) << ',' << fmt(d.sup_norm) << ','
          << fmt(d.morawetz) << ',' << fmt(d.dt) << '\n';
    write_text_atomic(path, s.str());
}

}  // namespace inls::io
