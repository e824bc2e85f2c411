#include "mflab/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "mflab/errors.hpp"

namespace mflab {

using nlohmann::json;

std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, mode);
    if (!out)
        throw Error("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in)
{
    std::ifstream in(path, mode);
    if (!in)
        throw SchemaError("cannot open file", 0, path.string());
    return in;
}

void write_metadata(std::ostream& out, const FileMetadata& meta)
{
    out << "# config_hash=" << meta.config_hash << '\n';
    if (meta.t)
        out << "# t=" << format_double(*meta.t) << '\n';
    if (meta.seed)
        out << "# seed=" << *meta.seed << '\n';
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true)
    {
        auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos)
            return out;
        start = comma + 1;
    }
}

double parse_double(const std::string& s, std::size_t line, const std::string& column)
{
    double v = 0;
    const char* end = s.data() + s.size();
    auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw SchemaError("column " + column + ": '" + s + "' is not a number", line);
    return v;
}

std::uint64_t parse_count(const std::string& s, std::size_t line, const std::string& column)
{
    std::uint64_t v = 0;
    const char* end = s.data() + s.size();
    auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw SchemaError("column " + column + ": '" + s + "' is not a non-negative integer", line);
    return v;
}

std::string chomp(std::string s)
{
    if (!s.empty() && s.back() == '\r')
        s.pop_back();
    return s;
}

// "# key=value" into meta; unknown keys are ignored.
void read_comment(const std::string& line, std::size_t lineno, FileMetadata& meta)
{
    std::string body = line.substr(1);
    auto a = body.find_first_not_of(' ');
    if (a == std::string::npos)
        return;
    body = body.substr(a);
    auto eq = body.find('=');
    if (eq == std::string::npos)
        return;
    std::string key = body.substr(0, eq), value = body.substr(eq + 1);
    if (key == "config_hash")
        meta.config_hash = value;
    else if (key == "t")
        meta.t = parse_double(value, lineno, "t");
    else if (key == "seed")
        meta.seed = parse_count(value, lineno, "seed");
}

} // namespace

// ---------------------------------------------------------------------------
// Particles

void write_particles_csv(std::ostream& out, const ParticleSystem& sys, const FileMetadata& meta)
{
    const int d = sys.dim();
    write_metadata(out, meta);
    out << "index";
    for (int a = 1; a <= d; ++a)
        out << ",x" << a;
    if (sys.has_velocities())
        for (int a = 1; a <= d; ++a)
            out << ",v" << a;
    out << '\n';
    for (std::size_t i = 0; i < sys.size(); ++i)
    {
        out << i;
        for (double x : sys.position(i))
            out << ',' << format_double(x);
        if (sys.has_velocities())
            for (double v : sys.velocity(i))
                out << ',' << format_double(v);
        out << '\n';
    }
}

void write_particles_csv(const std::filesystem::path& path, const ParticleSystem& sys, const FileMetadata& meta)
{
    auto out = open_out(path);
    write_particles_csv(out, sys, meta);
}

ParticleSystem read_particles_csv(std::istream& in, FileMetadata* meta)
{
    FileMetadata local;
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    while (std::getline(in, line))
    {
        ++lineno;
        line = chomp(line);
        if (line.empty())
            continue;
        if (line[0] == '#')
        {
            read_comment(line, lineno, local);
            continue;
        }
        header = split(line);
        break;
    }
    if (header.empty())
        throw SchemaError("missing particle header", lineno);
    if (header[0] != "index" || header.size() < 2)
        throw SchemaError("particle header must start with index,x1", lineno);
    int d = 0;
    while (std::size_t(d + 1) < header.size() && header[d + 1] == "x" + std::to_string(d + 1))
        ++d;
    bool velocities = header.size() == std::size_t(1 + 2 * d);
    if (d == 0 || (header.size() != std::size_t(1 + d) && !velocities))
        throw SchemaError("particle header must be index,x1..xd[,v1..vd]", lineno);
    for (int a = 0; velocities && a < d; ++a)
        if (header[1 + d + a] != "v" + std::to_string(a + 1))
            throw SchemaError("particle header must be index,x1..xd[,v1..vd]", lineno);
    std::vector<double> x, v;
    std::size_t expected = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        line = chomp(line);
        if (line.empty())
            continue;
        auto f = split(line);
        if (f.size() != header.size())
            throw SchemaError("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()),
                              lineno);
        if (parse_count(f[0], lineno, "index") != expected++)
            throw SchemaError("particle indices must be 0, 1, 2, ...", lineno);
        for (int a = 0; a < d; ++a)
            x.push_back(parse_double(f[1 + a], lineno, header[1 + a]));
        for (int a = 0; velocities && a < d; ++a)
            v.push_back(parse_double(f[1 + d + a], lineno, header[1 + d + a]));
    }
    if (meta)
        *meta = local;
    return velocities ? ParticleSystem(d, std::move(x), std::move(v)) : ParticleSystem(d, std::move(x));
}

ParticleSystem read_particles_csv(const std::filesystem::path& path, FileMetadata* meta)
{
    auto in = open_in(path);
    try
    {
        return read_particles_csv(in, meta);
    }
    catch (const SchemaError& e)
    {
        throw SchemaError(e.message(), e.line(), path.string());
    }
}

// ---------------------------------------------------------------------------
// Diagnostics

const char* const diagnostics_header =
    "t,N,seed,F_N,F_N_per_N2,kinetic_mod,H_N_total,sum_g_r,min_r,TE_r,bl_dist,hn_per_n2,en_per_n";

void write_diagnostics_header(std::ostream& out, const std::string& config_hash)
{
    out << "# config_hash=" << config_hash << '\n' << diagnostics_header << '\n';
}

void write_diagnostics_row(std::ostream& out, const DiagnosticsRecord& r)
{
    out << format_double(r.t) << ',' << r.N << ',' << r.seed;
    for (double v : {r.F_N, r.F_N_per_N2, r.kinetic_mod, r.H_N_total, r.sum_g_r, r.min_r, r.TE_r, r.bl_dist,
                     r.hn_per_n2, r.en_per_n})
        out << ',' << format_double(v);
    out << '\n';
}

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& rows,
                           const std::string& config_hash)
{
    auto out = open_out(path);
    write_diagnostics_header(out, config_hash);
    for (const auto& r : rows)
        write_diagnostics_row(out, r);
}

std::vector<DiagnosticsRecord> read_diagnostics_csv(std::istream& in, std::string* config_hash)
{
    static const std::vector<std::string> columns = split(diagnostics_header);
    FileMetadata meta;
    std::vector<DiagnosticsRecord> rows;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line))
    {
        ++lineno;
        line = chomp(line);
        if (line.empty())
            continue;
        if (line[0] == '#')
        {
            if (header)
                throw SchemaError("comment after the header", lineno);
            read_comment(line, lineno, meta);
            continue;
        }
        if (!header)
        {
            if (line != diagnostics_header)
                throw SchemaError(std::string("expected header ") + diagnostics_header, lineno);
            header = true;
            continue;
        }
        auto f = split(line);
        if (f.size() != columns.size())
            throw SchemaError("expected " + std::to_string(columns.size()) + " fields, got " + std::to_string(f.size()),
                              lineno);
        DiagnosticsRecord r;
        r.t = parse_double(f[0], lineno, columns[0]);
        r.N = std::size_t(parse_count(f[1], lineno, columns[1]));
        r.seed = parse_count(f[2], lineno, columns[2]);
        double* fields[] = {&r.F_N,     &r.F_N_per_N2, &r.kinetic_mod, &r.H_N_total, &r.sum_g_r,
                            &r.min_r,   &r.TE_r,       &r.bl_dist,     &r.hn_per_n2, &r.en_per_n};
        for (std::size_t c = 0; c < 10; ++c)
            *fields[c] = parse_double(f[3 + c], lineno, columns[3 + c]);
        rows.push_back(r);
    }
    if (!header)
        throw SchemaError("missing diagnostics header", lineno);
    if (config_hash)
        *config_hash = meta.config_hash;
    return rows;
}

std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::filesystem::path& path, std::string* config_hash)
{
    auto in = open_in(path);
    try
    {
        return read_diagnostics_csv(in, config_hash);
    }
    catch (const SchemaError& e)
    {
        throw SchemaError(e.message(), e.line(), path.string());
    }
}

// ---------------------------------------------------------------------------
// Grids

void write_grid(const std::filesystem::path& stem, const MeasureGrid& mu, const std::string& config_hash)
{
    auto bin_path = stem;
    bin_path += ".bin";
    auto json_path = stem;
    json_path += ".json";
    {
        auto out = open_out(bin_path, std::ios::binary);
        std::vector<unsigned char> bytes(mu.values.size() * 8);
        for (std::size_t k = 0; k < mu.values.size(); ++k)
        {
            auto bits = std::bit_cast<std::uint64_t>(mu.values[k]);
            for (int b = 0; b < 8; ++b)
                bytes[k * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
        }
        out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    }
    json side = {{"format", "float64-le"},
                 {"layout", "row-major, last axis fastest"},
                 {"d", mu.geom.d},
                 {"n", mu.geom.n},
                 {"box", {mu.geom.lo, mu.geom.hi()}},
                 {"time", mu.time},
                 {"mass", mu.mass()},
                 {"config_hash", config_hash},
                 {"data", bin_path.filename().string()}};
    write_json(json_path, side);
}

MeasureGrid read_grid(const std::filesystem::path& stem, std::string* config_hash)
{
    auto bin_path = stem;
    bin_path += ".bin";
    auto json_path = stem;
    json_path += ".json";
    json side;
    {
        auto in = open_in(json_path);
        try
        {
            side = json::parse(in);
        }
        catch (const json::exception& e)
        {
            throw SchemaError(std::string("grid sidecar: ") + e.what(), 0);
        }
    }
    GridGeometry g;
    try
    {
        g.d = side.at("d").get<int>();
        g.n = side.at("n").get<int>();
        g.lo = side.at("box").at(0).get<double>();
        g.h = (side.at("box").at(1).get<double>() - g.lo) / g.n;
        if (side.at("format").get<std::string>() != "float64-le")
            throw SchemaError("grid sidecar: unsupported format", 0);
    }
    catch (const json::exception& e)
    {
        throw SchemaError(std::string("grid sidecar: ") + e.what(), 0);
    }
    if (g.d < 1 || g.n < 1 || !(g.h > 0))
        throw SchemaError("grid sidecar: bad geometry", 0);
    MeasureGrid mu(g, side.value("time", 0.0));
    auto in = open_in(bin_path, std::ios::binary);
    std::vector<unsigned char> bytes(mu.values.size() * 8);
    in.read(reinterpret_cast<char*>(bytes.data()), std::streamsize(bytes.size()));
    if (std::size_t(in.gcount()) != bytes.size() || in.peek() != std::char_traits<char>::eof())
        throw SchemaError("grid data size does not match the sidecar", 0);
    for (std::size_t k = 0; k < mu.values.size(); ++k)
    {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= std::uint64_t(bytes[k * 8 + b]) << (8 * b);
        mu.values[k] = std::bit_cast<double>(bits);
    }
    if (config_hash)
        *config_hash = side.value("config_hash", "");
    return mu;
}

void write_radial_csv(const std::filesystem::path& path, const MeasureGrid& mu, const std::string& config_hash)
{
    const auto& g = mu.geom;
    const double rmax = std::max(std::abs(g.lo), std::abs(g.hi())) * std::sqrt(double(g.d));
    const std::size_t bins = std::size_t(std::ceil(rmax / g.h));
    std::vector<double> mass(bins, 0.0), volume(bins, 0.0);
    std::vector<double> c(g.d);
    for (std::size_t k = 0; k < g.size(); ++k)
    {
        g.cell_center(k, c);
        double r2 = 0;
        for (double x : c)
            r2 += x * x;
        std::size_t b = std::min(bins - 1, std::size_t(std::sqrt(r2) / g.h));
        mass[b] += mu.values[k] * g.cell_volume();
        volume[b] += g.cell_volume();
    }
    std::vector<std::vector<double>> rows;
    double cumulative = 0;
    for (std::size_t b = 0; b < bins; ++b)
    {
        if (volume[b] == 0)
            continue;
        cumulative += mass[b];
        rows.push_back({(b + 0.5) * g.h, mass[b] / volume[b], cumulative});
    }
    write_table_csv(path, {"r", "density", "cumulative_mass"}, rows, config_hash);
}

void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows, const std::string& config_hash)
{
    auto out = open_out(path);
    out << "# config_hash=" << config_hash << '\n';
    for (std::size_t c = 0; c < header.size(); ++c)
        out << (c ? "," : "") << header[c];
    out << '\n';
    for (const auto& row : rows)
    {
        if (row.size() != header.size())
            throw Error("table row width does not match the header");
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << format_double(row[c]);
        out << '\n';
    }
}

void append_jsonl(const std::filesystem::path& path, const json& record)
{
    auto out = open_out(path, std::ios::app);
    out << record.dump() << '\n';
}

void write_json(const std::filesystem::path& path, const json& doc)
{
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
}

} // namespace mflab
