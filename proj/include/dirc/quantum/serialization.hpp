#pragma once

#include <dirc/quantum/presets.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

// Setup files are JSON. Complex numbers are [re, im] pairs, matrices are
// row-major arrays of rows. Settings and outcomes are 0-based except in the
// "default_target" string, which uses the CLI's 1-based target syntax.

namespace dirc {

namespace detail {

using nlohmann::json;

inline json complex_json(const Complex& c) { return json::array({c.real(), c.imag()}); }

inline Complex complex_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("setup file: complex entry must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

template <class M>
json matrix_json(const M& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

template <class M>
M matrix_from(const json& j) {
    M m;
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != m.rows())
        throw std::invalid_argument("setup file: matrix has wrong dimension");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m.cols())
            throw std::invalid_argument("setup file: matrix has wrong dimension");
        for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = complex_from(row[static_cast<std::size_t>(k)]);
    }
    return m;
}

inline json measurements_json(const std::vector<QubitMeasurement>& ms) {
    json out = json::array();
    for (const auto& m : ms) {
        json e = json::array();
        for (const auto& el : m.elements) e.push_back(matrix_json(el));
        out.push_back({{"elements", e}});
    }
    return out;
}

inline std::vector<QubitMeasurement> measurements_from(const json& j) {
    std::vector<QubitMeasurement> out;
    for (const auto& m : j) {
        QubitMeasurement q;
        for (const auto& el : m.at("elements")) q.elements.push_back(matrix_from<Qubit2>(el));
        out.push_back(std::move(q));
    }
    return out;
}

}  // namespace detail

inline nlohmann::json functional_to_json(const BellFunctional& f) {
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& [k, c] : f.coefficients()) coeffs.push_back({k.a, k.b, k.x, k.y, c});
    nlohmann::json j = {{"name", f.name()}, {"constant", f.constant()}, {"coefficients", coeffs}};
    if (f.quantum_bound) j["quantum_bound"] = *f.quantum_bound;
    if (f.classical_bound) j["classical_bound"] = *f.classical_bound;
    return j;
}

inline BellFunctional functional_from_json(const nlohmann::json& j, const Scenario& s) {
    BellFunctional f(s, j.value("name", std::string("functional")));
    f.add_constant(j.value("constant", 0.0));
    for (const auto& t : j.at("coefficients")) {
        if (!t.is_array() || t.size() != 5) throw std::invalid_argument("setup file: coefficient must be [a,b,x,y,value]");
        f.add_probability(t[0].get<int>(), t[1].get<int>(), t[2].get<int>(), t[3].get<int>(), t[4].get<double>());
    }
    if (j.contains("quantum_bound")) f.quantum_bound = j["quantum_bound"].get<double>();
    if (j.contains("classical_bound")) f.classical_bound = j["classical_bound"].get<double>();
    return f;
}

inline nlohmann::json setup_to_json(const Setup& s) {
    nlohmann::json fs = nlohmann::json::array();
    for (const auto& f : s.functionals) fs.push_back(functional_to_json(f));
    return {{"name", s.name},
            {"state", detail::matrix_json(s.state)},
            {"alice", detail::measurements_json(s.alice)},
            {"bob", detail::measurements_json(s.bob)},
            {"functionals", fs},
            {"certifying", s.certifying},
            {"default_target", s.default_target.to_string()},
            {"default_mode", s.default_mode},
            {"parameters", s.parameters}};
}

inline Setup setup_from_json(const nlohmann::json& j) {
    try {
        Setup s;
        s.name = j.value("name", std::string("custom"));
        s.state = detail::matrix_from<TwoQubit4>(j.at("state"));
        s.alice = detail::measurements_from(j.at("alice"));
        s.bob = detail::measurements_from(j.at("bob"));
        const Scenario sc = s.scenario();
        if (j.contains("functionals"))
            for (const auto& f : j["functionals"]) s.functionals.push_back(functional_from_json(f, sc));
        if (j.contains("certifying")) s.certifying = j["certifying"].get<std::vector<int>>();
        else
            for (int i = 0; i < static_cast<int>(s.functionals.size()); ++i) s.certifying.push_back(i);
        s.default_target = j.contains("default_target") ? GuessTarget::parse(j["default_target"].get<std::string>())
                                                        : GuessTarget::local(Party::alice, 0);
        s.default_mode = j.value("default_mode", std::string("behavior"));
        if (j.contains("parameters")) s.parameters = j["parameters"].get<std::map<std::string, double>>();
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("setup file: ") + e.what());
    }
}

inline Setup load_setup(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read setup file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("setup file '" + path + "' is not valid JSON: " + e.what());
    }
    return setup_from_json(j);
}

/// CSV with header x,y,a,b,p (0-based indices).
inline std::string behavior_csv(const Behavior& p) {
    std::ostringstream os;
    os << "x,y,a,b,p\n" << std::setprecision(17);
    const Scenario& s = p.scenario();
    for (int x = 0; x < s.settings(Party::alice); ++x)
        for (int y = 0; y < s.settings(Party::bob); ++y)
            for (int a = 0; a < s.outcomes(Party::alice, x); ++a)
                for (int b = 0; b < s.outcomes(Party::bob, y); ++b)
                    os << x << ',' << y << ',' << a << ',' << b << ',' << p(a, b, x, y) << '\n';
    return os.str();
}

}  // namespace dirc
