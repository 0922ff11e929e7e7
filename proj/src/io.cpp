#include "debond/io.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace debond::io {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

void print_g17(std::ostream& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

}  // namespace

void write_mask_pgm(const std::string& path, const RegionMask& mask) {
    const Grid& g = *mask.grid;
    std::ofstream out = open_out(path);
    out << "P2\n" << g.nx << " " << g.ny << "\n1\n";
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            out << int(mask.ind[g.id(i, j)]);
            out << (i + 1 < g.nx ? ' ' : '\n');
        }
    }
}

RegionMask read_mask_pgm(const std::string& path, const Grid& g) {
    std::ifstream in = open_in(path);
    std::string magic;
    in >> magic;
    if (magic != "P2") throw std::runtime_error("not an ASCII PGM: " + path);
    int w, h, maxval;
    in >> w >> h >> maxval;
    if (w != g.nx || h != g.ny) throw std::runtime_error("mask size mismatch: " + path);
    RegionMask m = RegionMask::empty(g);
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) {
            int v;
            if (!(in >> v)) throw std::runtime_error("truncated PGM: " + path);
            m.ind[g.id(i, j)] = v ? 1 : 0;
        }
    m.recompute();
    return m;
}

void write_mask_csv(const std::string& path, const RegionMask& mask) {
    const Grid& g = *mask.grid;
    std::ofstream out = open_out(path);
    out << (g.dim == 1 ? "index,x,value\n" : "index,x,y,value\n");
    for (int n = 0; n < g.n_nodes; ++n) {
        if (!g.active[n]) continue;
        out << n << ',';
        print_g17(out, g.node_x(n));
        if (g.dim == 2) {
            out << ',';
            print_g17(out, g.node_y(n));
        }
        out << ',' << int(mask.ind[n]) << '\n';
    }
}

void write_field_csv(const std::string& path, const ScalarField& f) {
    const Grid& g = *f.grid;
    std::ofstream out = open_out(path);
    out << (g.dim == 1 ? "index,x,value\n" : "index,x,y,value\n");
    for (int n = 0; n < g.n_nodes; ++n) {
        if (!g.active[n]) continue;
        out << n << ',';
        print_g17(out, g.node_x(n));
        if (g.dim == 2) {
            out << ',';
            print_g17(out, g.node_y(n));
        }
        out << ',';
        print_g17(out, f.values[n]);
        out << '\n';
    }
}

namespace {

std::vector<double> read_indexed_values(const std::string& path, const Grid& g) {
    std::ifstream in = open_in(path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> vals(g.n_nodes, 0.0);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 2) throw std::runtime_error("bad CSV row in " + path);
        int n = std::stoi(cells.front());
        if (n < 0 || n >= g.n_nodes) throw std::runtime_error("node index out of range in " + path);
        vals[n] = std::stod(cells.back());
    }
    return vals;
}

}  // namespace

ScalarField read_field_csv(const std::string& path, const Grid& g) {
    ScalarField f = ScalarField::zeros(g);
    f.values = read_indexed_values(path, g);
    for (int n = 0; n < g.n_nodes; ++n)
        if (!g.active[n]) f.values[n] = 0.0;
    return f;
}

std::vector<double> read_node_values_csv(const std::string& path, const Grid& g) {
    return read_indexed_values(path, g);
}

void write_ledger_csv(const std::string& path, const EvolutionTrace& trace) {
    std::ofstream out = open_out(path);
    out << kLedgerHeader << '\n';
    for (size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& s = trace.steps[i];
        out << i << ',';
        print_g17(out, s.t);
        out << ',';
        print_g17(out, s.ledger.elastic);
        out << ',';
        print_g17(out, s.ledger.dissipated);
        out << ',';
        print_g17(out, s.ledger.work);
        out << ',';
        print_g17(out, s.ledger.eb_residual);
        out << ',';
        print_g17(out, s.ledger.gs_margin);
        out << ',';
        print_g17(out, s.front);
        out << '\n';
    }
}

void write_audit_csv(const std::string& path, const std::vector<audit::AuditRow>& rows) {
    std::ofstream out = open_out(path);
    out << "i,t,residual,power,power_defined,gs_margin,gs_checked\n";
    for (const auto& r : rows) {
        out << r.i << ',';
        print_g17(out, r.t);
        out << ',';
        print_g17(out, r.residual);
        out << ',';
        print_g17(out, r.power);
        out << ',' << int(r.power_defined) << ',';
        print_g17(out, r.gs_margin);
        out << ',' << int(r.gs_checked) << '\n';
    }
}

void write_competitors_csv(const std::string& path, const StabilityReport& report) {
    std::ofstream out = open_out(path);
    out << "id,type,margin,pass\n";
    for (size_t k = 0; k < report.margins.size(); ++k) {
        const CompetitorMargin& m = report.margins[k];
        bool pass = !m.growth || m.margin >= -report.tol;
        out << k << ',' << m.kind << ',';
        print_g17(out, m.margin);
        out << ',' << int(pass) << '\n';
    }
}

void write_audit_summary(const std::string& path, const audit::AuditReport& rep,
                         const audit::Certification& cert) {
    std::ofstream out = open_out(path);
    out << "max |balance residual|: " << rep.max_abs_residual << " (bound " << rep.eb_upper
        << ")\n"
        << "one-sided inequality slack: " << rep.min_lower_gap << " (bound " << -rep.tol_eb_lower
        << ")\n"
        << "worst growth margin: " << rep.worst_growth_margin << " (tol " << rep.tol_gs << ")\n"
        << "balance certified: " << (rep.eb_certified ? "yes" : "no") << "\n"
        << "conditions: boundary=" << cert.boundary_ok << " initial=" << cert.initial_ok
        << " irreversible=" << cert.irreversible_ok << " sets=" << cert.sets_consistent
        << " stability=" << cert.stable_ok << " balance=" << cert.balance_ok << "\n"
        << cert.summary << "\n";
}

void write_trajectory_csv(const std::string& path, const onedim::BalanceSeries& balance) {
    std::ofstream out = open_out(path);
    out << "t,front,energy,dissipated,work,residual\n";
    for (size_t k = 0; k < balance.t.size(); ++k) {
        print_g17(out, balance.t[k]);
        out << ',';
        print_g17(out, balance.front[k]);
        out << ',';
        print_g17(out, balance.energy[k]);
        out << ',';
        print_g17(out, balance.dissipated[k]);
        out << ',';
        print_g17(out, balance.work[k]);
        out << ',';
        print_g17(out, balance.residual[k]);
        out << '\n';
    }
}

void write_refine_csv(const std::string& path, const std::vector<RefineRow>& rows) {
    std::ofstream out = open_out(path);
    out << "steps,elastic_final,dissipated_final,max_abs_residual,front_final\n";
    for (const auto& r : rows) {
        out << r.steps << ',';
        print_g17(out, r.elastic_final);
        out << ',';
        print_g17(out, r.dissipated_final);
        out << ',';
        print_g17(out, r.max_abs_residual);
        out << ',';
        print_g17(out, r.front_final);
        out << '\n';
    }
}

// --- minimal PNG writer: 8-bit grayscale, stored (uncompressed) deflate ---

namespace {

uint32_t crc32_update(uint32_t crc, const uint8_t* data, size_t len) {
    static std::array<uint32_t, 256> table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t n = 0; n < 256; ++n) {
            uint32_t c = n;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            t[n] = c;
        }
        return t;
    }();
    for (size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xffu] ^ (crc >> 8);
    return crc;
}

void put_u32(std::string& s, uint32_t v) {
    s.push_back(char((v >> 24) & 0xff));
    s.push_back(char((v >> 16) & 0xff));
    s.push_back(char((v >> 8) & 0xff));
    s.push_back(char(v & 0xff));
}

void write_chunk(std::ostream& out, const char type[4], const std::string& payload) {
    std::string head;
    put_u32(head, uint32_t(payload.size()));
    out.write(head.data(), 4);
    uint32_t crc = 0xffffffffu;
    crc = crc32_update(crc, reinterpret_cast<const uint8_t*>(type), 4);
    crc = crc32_update(crc, reinterpret_cast<const uint8_t*>(payload.data()), payload.size());
    crc ^= 0xffffffffu;
    out.write(type, 4);
    out.write(payload.data(), std::streamsize(payload.size()));
    std::string tail;
    put_u32(tail, crc);
    out.write(tail.data(), 4);
}

std::string zlib_stored(const std::string& raw) {
    std::string z;
    z.push_back(0x78);
    z.push_back(0x01);
    size_t pos = 0;
    do {
        uint16_t n = uint16_t(std::min<size_t>(raw.size() - pos, 65535));
        uint16_t nlen = uint16_t(~n);
        bool last = pos + n >= raw.size();
        z.push_back(last ? 1 : 0);
        z.push_back(char(n & 0xff));
        z.push_back(char(n >> 8));
        z.push_back(char(nlen & 0xff));
        z.push_back(char(nlen >> 8));
        z.append(raw, pos, n);
        pos += n;
    } while (pos < raw.size());
    uint32_t a = 1, b = 0;
    for (unsigned char c : raw) {
        a = (a + c) % 65521;
        b = (b + a) % 65521;
    }
    put_u32(z, (b << 16) | a);
    return z;
}

}  // namespace

void write_field_png(const std::string& path, const ScalarField& f) {
    const Grid& g = *f.grid;
    if (g.dim != 2) throw std::runtime_error("PNG output needs a 2D field");
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (int n = 0; n < g.n_nodes; ++n) {
        if (!g.active[n]) continue;
        double v = f.values[n];
        if (first || v < lo) lo = first ? v : std::min(lo, v);
        if (first || v > hi) hi = first ? v : std::max(hi, v);
        first = false;
    }
    double span = hi - lo > 0 ? hi - lo : 1.0;

    std::string raw;
    raw.reserve(size_t(g.ny) * (size_t(g.nx) + 1));
    for (int j = g.ny - 1; j >= 0; --j) {  // image row 0 at the top
        raw.push_back(0);                  // filter: none
        for (int i = 0; i < g.nx; ++i) {
            int n = g.id(i, j);
            double v = g.active[n] ? (f.values[n] - lo) / span : 0.0;
            raw.push_back(char(uint8_t(std::lround(255.0 * std::clamp(v, 0.0, 1.0)))));
        }
    }

    std::ofstream out = open_out(path);
    static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    out.write(reinterpret_cast<const char*>(sig), 8);
    std::string ihdr;
    put_u32(ihdr, uint32_t(g.nx));
    put_u32(ihdr, uint32_t(g.ny));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(0);  // grayscale
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    write_chunk(out, "IHDR", ihdr);
    write_chunk(out, "IDAT", zlib_stored(raw));
    write_chunk(out, "IEND", "");
}

}  // namespace debond::io
