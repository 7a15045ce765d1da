#include "fracpar/system_io.hpp"

#include <fstream>

#include "fracpar/error.hpp"
#include "fracpar/expr.hpp"
#include "fracpar/matrix_tools.hpp"

namespace fracpar {

using nlohmann::json;

namespace {

/// Entry as either a constant or an expression pair.
struct entry {
    std::optional<expression> re, im;
    double re_c = 0.0, im_c = 0.0;

    bool constant() const { return !re && !im; }
    cplx operator()(const std::vector<double>& x) const {
        return {re ? (*re)(x) : re_c, im ? (*im)(x) : im_c};
    }
};

void read_real(const json& j, std::optional<expression>& e, double& c, int n) {
    if (j.is_number()) {
        c = j.get<double>();
        return;
    }
    if (j.is_string()) {
        expression ex(j.get<std::string>());
        if (ex.max_variable() > n)
            throw config_error("expression '" + ex.text() + "' uses a coordinate beyond n");
        if (ex.max_variable() == 0)
            c = ex({});
        else
            e = std::move(ex);
        return;
    }
    throw config_error("matrix entry must be a number, an expression string or {re, im}");
}

entry read_entry(const json& j, int n) {
    entry e;
    if (j.is_object()) {
        if (j.contains("re")) read_real(j.at("re"), e.re, e.re_c, n);
        if (j.contains("im")) read_real(j.at("im"), e.im, e.im_c, n);
        for (auto it = j.begin(); it != j.end(); ++it)
            if (it.key() != "re" && it.key() != "im") throw config_error("unknown key '" + it.key() + "' in entry");
    } else {
        read_real(j, e.re, e.re_c, n);
    }
    return e;
}

struct coefficient_table {
    multi_index beta;
    std::vector<entry> entries;  // row-major N x N
    bool constant() const {
        for (const auto& e : entries)
            if (!e.constant()) return false;
        return true;
    }
};

coefficient_table read_coefficient(const json& j, int n, int N) {
    if (!j.is_object() || !j.contains("beta") || !j.contains("matrix"))
        throw config_error("coefficient needs 'beta' and 'matrix'");
    coefficient_table t;
    t.beta = multi_index(j.at("beta").get<std::vector<int>>());
    if (t.beta.dim() != n) throw config_error("coefficient beta has the wrong dimension");
    const json& m = j.at("matrix");
    if (N == 1 && !m.is_array()) {
        t.entries.push_back(read_entry(m, n));
        return t;
    }
    if (!m.is_array() || static_cast<int>(m.size()) != N) throw config_error("matrix must have N rows");
    for (const auto& row : m) {
        if (!row.is_array() || static_cast<int>(row.size()) != N) throw config_error("matrix rows must have N entries");
        for (const auto& v : row) t.entries.push_back(read_entry(v, n));
    }
    return t;
}

coefficient_fn make_fn(const coefficient_table& t, int N) {
    auto entries = t.entries;
    return [entries, N](const std::vector<double>& x) {
        cmatrix a(N, N);
        for (int i = 0; i < N; ++i)
            for (int k = 0; k < N; ++k) a(i, k) = entries[i * N + k](x);
        return a;
    };
}

int get_positive(const json& j, const char* key) {
    if (!j.contains(key)) throw config_error(std::string("system: missing '") + key + "'");
    const int v = j.at(key).get<int>();
    if (v < 1) throw config_error(std::string("system: '") + key + "' must be positive");
    return v;
}

}  // namespace

const constant_operator& system_spec::require_constant() const {
    if (!constant) throw config_error("system has variable or lower-order coefficients; a constant operator is required");
    return *constant;
}

system_spec parse_system(const json& j) {
    try {
        if (!j.is_object()) throw config_error("system: top level must be an object");
        system_spec out;
        out.source = j;
        variable_system& s = out.system;
        s.n = get_positive(j, "n");
        s.N = get_positive(j, "N");
        s.b = get_positive(j, "b");
        if (!j.contains("principal") || !j.at("principal").is_array())
            throw config_error("system: 'principal' must be an array");
        bool all_const = true;
        std::map<multi_index, cmatrix> const_coeffs;
        for (const auto& c : j.at("principal")) {
            auto t = read_coefficient(c, s.n, s.N);
            if (t.beta.order() != 2 * s.b) throw config_error("system: principal beta must have order 2b");
            if (s.principal.count(t.beta)) throw config_error("system: duplicate principal beta");
            s.principal[t.beta] = make_fn(t, s.N);
            if (t.constant())
                const_coeffs[t.beta] = s.principal[t.beta](std::vector<double>(s.n, 0.0));
            else
                all_const = false;
        }
        if (j.contains("lower")) {
            for (const auto& c : j.at("lower")) {
                auto t = read_coefficient(c, s.n, s.N);
                if (t.beta.order() >= 2 * s.b) throw config_error("system: lower beta must have order < 2b");
                if (s.lower.count(t.beta)) throw config_error("system: duplicate lower beta");
                s.lower[t.beta] = make_fn(t, s.N);
            }
        }
        s.constant_principal = all_const;
        if (j.contains("holder")) {
            const json& h = j.at("holder");
            s.holder_exponent = h.value("exponent", 1.0);
            s.holder_constant = h.value("constant", 0.0);
        } else if (!all_const || !s.lower.empty()) {
            throw config_error("system: variable coefficients need declared 'holder' metadata");
        }
        if (j.contains("bound")) {
            s.bound = j.at("bound").get<double>();
        } else if (all_const && s.lower.empty()) {
            for (const auto& [mu, a] : const_coeffs) s.bound = std::max(s.bound, norm2(a));
        } else {
            throw config_error("system: variable coefficients need a declared 'bound'");
        }
        s.validate();
        if (all_const && s.lower.empty()) out.constant.emplace(s.n, s.N, s.b, const_coeffs);
        return out;
    } catch (const json::exception& e) {
        throw config_error(std::string("system JSON: ") + e.what());
    }
}

system_spec load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open system file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw config_error("system file '" + path + "': " + e.what());
    }
    return parse_system(j);
}

json to_json(const constant_operator& op) {
    json j;
    j["n"] = op.n();
    j["N"] = op.N();
    j["b"] = op.b();
    json pr = json::array();
    for (const auto& [mu, a] : op.coeffs()) {
        json m = json::array();
        for (int i = 0; i < op.N(); ++i) {
            json row = json::array();
            for (int k = 0; k < op.N(); ++k) {
                const cplx v = a(i, k);
                if (v.imag() == 0.0)
                    row.push_back(v.real());
                else
                    row.push_back({{"re", v.real()}, {"im", v.imag()}});
            }
            m.push_back(row);
        }
        pr.push_back({{"beta", mu.c}, {"matrix", m}});
    }
    j["principal"] = pr;
    return j;
}

}  // namespace fracpar
