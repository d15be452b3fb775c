#pragma once

// Serialization of reports. Exact scalars are written as "p/q" strings
// (integers without the "/1"), floats as shortest round-trip decimals.

#include "pmart/construction.hpp"
#include "pmart/inequalities.hpp"
#include "pmart/martingales.hpp"
#include "pmart/moments.hpp"

#include <json.hpp>

#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace pmart {

using Json = nlohmann::ordered_json;

template <typename T, std::size_t N>
Json to_json(const Matrix<T, N>& m)
{
    Json rows = Json::array();
    for (const auto& row : m.a) {
        Json r = Json::array();
        for (const auto& x : row)
            r.push_back(to_string(x));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline Json to_json(const std::vector<Rational>& v)
{
    Json out = Json::array();
    for (const auto& x : v)
        out.push_back(to_string(x));
    return out;
}

inline Json to_json(const InequalityReport& r)
{
    Json j;
    j["id"] = to_string(r.id);
    j["mode"] = to_string(r.mode);
    j["n"] = r.n;
    j["lhs"] = r.lhs;
    if (r.standard_error)
        j["stderr"] = to_string(*r.standard_error);
    j["rhs"] = r.rhs;
    j["holds"] = r.holds;
    j["status"] = r.status;
    if (r.mode == VerifyMode::exact) {
        j["permutations"] = r.permutations;
    } else {
        j["samples"] = r.samples;
        j["seed"] = r.seed.value_or(0);
    }
    Json params = Json::object();
    if (r.params.weights)
        params["weights"] = to_json(*r.params.weights);
    if (r.params.bridge_m)
        params["bridge_m"] = *r.params.bridge_m;
    if (r.params.rhs_scale != 1)
        params["rhs_scale"] = to_string(r.params.rhs_scale);
    j["parameters"] = std::move(params);
    return j;
}

inline Json to_json(const MartingaleCheck& c)
{
    Json j;
    j["holds"] = c.holds;
    j["histories_checked"] = c.histories_checked;
    if (c.witness)
        j["witness"] = to_one_based(*c.witness);
    else
        j["witness"] = nullptr;
    return j;
}

inline Json to_json(const MomentReport& m)
{
    return Json{{"id", m.id},
                {"formula", to_string(m.formula)},
                {"oracle", to_string(m.oracle)},
                {"equal", m.equal()}};
}

inline const char* csv_header() { return "id,n,mode,lhs,rhs,holds,seed,samples"; }

inline std::string csv_row(const InequalityReport& r)
{
    std::ostringstream os;
    os << to_string(r.id) << ',' << r.n << ',' << to_string(r.mode) << ',' << r.lhs << ','
       << r.rhs << ',' << (r.holds ? "true" : "false") << ',';
    if (r.seed)
        os << *r.seed;
    os << ',';
    if (r.mode == VerifyMode::monte_carlo)
        os << r.samples;
    return os.str();
}

inline std::string text_line(const InequalityReport& r)
{
    std::ostringstream os;
    os << std::left << std::setw(16) << to_string(r.id) << " n=" << std::setw(3) << r.n << ' '
       << std::setw(5) << to_string(r.mode) << " lhs=" << r.lhs;
    if (r.standard_error && r.mode == VerifyMode::monte_carlo)
        os << " (se " << to_string(*r.standard_error) << ")";
    os << " rhs=" << r.rhs << "  " << r.status;
    return os.str();
}

} // namespace pmart
