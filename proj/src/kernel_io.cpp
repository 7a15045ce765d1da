#include "fracpar/kernel_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fracpar/error.hpp"

namespace fracpar {

namespace fs = std::filesystem;

void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string field_csv(const kernel_field& f, const std::string& digest) {
    std::string s;
    s += "# fracpar kernel_field kind=";
    s += to_string(f.kind);
    s += " digest=" + digest + "\n";
    s += "t";
    for (int d = 1; d <= f.grid.n; ++d) s += ",x" + std::to_string(d);
    s += ",i,j,re,im\n";
    const std::size_t P = f.grid.size();
    for (std::size_t ti = 0; ti < f.times.size(); ++ti) {
        const std::string tt = format_number(f.times[ti]);
        for (std::size_t p = 0; p < P; ++p) {
            std::string prefix = tt;
            for (double c : f.grid.point(p)) prefix += "," + format_number(c);
            const bool sing = !f.singular.empty() && f.singular[f.index(ti, p)];
            const cmatrix& v = f.at(ti, p);
            for (int i = 0; i < f.N; ++i)
                for (int j = 0; j < f.N; ++j) {
                    s += prefix;
                    s += "," + std::to_string(i) + "," + std::to_string(j) + ",";
                    if (sing) {
                        s += "nan,nan\n";
                    } else {
                        s += format_number(v(i, j).real()) + "," + format_number(v(i, j).imag()) + "\n";
                    }
                }
        }
    }
    return s;
}

nlohmann::json field_header(const kernel_field& f, const std::string& digest) {
    nlohmann::json h;
    h["format"] = "fracpar.kernel_field.v1";
    h["kind"] = to_string(f.kind);
    h["derivative"] = f.derivative.c;
    h["N"] = f.N;
    h["grid"] = {{"n", f.grid.n},
                 {"half_width", f.grid.half_width},
                 {"points_per_axis", f.grid.points_per_axis},
                 {"spacing", f.grid.spacing()}};
    h["times"] = f.times;
    std::size_t sing = 0;
    for (unsigned char c : f.singular) sing += c ? 1 : 0;
    h["singular_points"] = sing;
    h["columns"] = "t,x1..xn,i,j,re,im";
    h["config_digest"] = digest;
    return h;
}

void write_field(const fs::path& stem, const kernel_field& f, const std::string& digest) {
    fs::path csv = stem, js = stem;
    csv += ".csv";
    js += ".json";
    write_atomic(csv, field_csv(f, digest));
    write_atomic(js, field_header(f, digest).dump(2) + "\n");
}

namespace {

field_kind kind_from_string(const std::string& s) {
    for (auto k : {field_kind::Z, field_kind::Z_alpha, field_kind::Y_alpha, field_kind::dtZ_alpha,
                   field_kind::Y_alpha_int1, field_kind::Y_alpha_int2})
        if (s == to_string(k)) return k;
    throw config_error("unknown kernel kind '" + s + "'");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw config_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

kernel_field read_field(const fs::path& stem) {
    fs::path csv = stem, js = stem;
    csv += ".csv";
    js += ".json";
    const auto h = nlohmann::json::parse(slurp(js));
    kernel_field f;
    f.kind = kind_from_string(h.at("kind").get<std::string>());
    f.derivative = multi_index(h.at("derivative").get<std::vector<int>>());
    f.N = h.at("N").get<int>();
    const auto& g = h.at("grid");
    f.grid = grid_spec(g.at("n").get<int>(), g.at("half_width").get<double>(), g.at("points_per_axis").get<int>());
    f.times = h.at("times").get<std::vector<double>>();
    const std::size_t P = f.grid.size();
    f.values.assign(P * f.times.size(), cmatrix::Zero(f.N, f.N));
    f.singular.assign(P * f.times.size(), 0);
    std::istringstream in(slurp(csv));
    std::string line;
    std::size_t row = 0;
    const std::size_t per_point = static_cast<std::size_t>(f.N) * f.N;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 't') continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        if (cells.size() != static_cast<std::size_t>(f.grid.n) + 5) throw config_error("kernel csv: malformed row");
        const std::size_t idx = row / per_point;
        if (idx >= f.values.size()) throw config_error("kernel csv: too many rows");
        const int i = std::stoi(cells[f.grid.n + 1]), j = std::stoi(cells[f.grid.n + 2]);
        const std::string& re = cells[f.grid.n + 3];
        if (re == "nan") {
            f.singular[idx] = 1;
        } else {
            f.values[idx](i, j) = cplx(std::stod(re), std::stod(cells[f.grid.n + 4]));
        }
        ++row;
    }
    if (row != f.values.size() * per_point) throw config_error("kernel csv: row count does not match the header");
    return f;
}

}  // namespace fracpar
