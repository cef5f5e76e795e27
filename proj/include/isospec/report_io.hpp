#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "isospec/framework.hpp"

namespace isospec {
namespace report_io {

/// 17 significant digits, lowercase scientific: round-trip exact.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

inline std::string spectral_report_csv(const SpectralReport& rep) {
    std::string out =
        "index,lambda_ref_re,lambda_ref_im,lambda_pert_re,lambda_pert_im,abs_diff,vec_residual\n";
    int idx = 0;
    for (const auto& e : rep.pairs) {
        out += std::to_string(idx++) + "," + format_double(e.lambda_ref.real()) + "," +
               format_double(e.lambda_ref.imag()) + "," + format_double(e.lambda_pert.real()) +
               "," + format_double(e.lambda_pert.imag()) + "," + format_double(e.abs_diff) +
               "," + format_double(e.vec_residual) + "\n";
    }
    return out;
}

inline nlohmann::ordered_json spectral_report_json(const SpectralReport& rep) {
    nlohmann::ordered_json j;
    j["passed"] = rep.passed;
    j["max_abs_diff"] = format_double(rep.max_abs_diff);
    j["riesz_condition"] = format_double(rep.riesz_condition);
    if (!rep.note.empty()) j["note"] = rep.note;
    auto pairs = nlohmann::ordered_json::array();
    int idx = 0;
    for (const auto& e : rep.pairs) {
        pairs.push_back({{"index", idx++},
                         {"lambda_ref_re", format_double(e.lambda_ref.real())},
                         {"lambda_ref_im", format_double(e.lambda_ref.imag())},
                         {"lambda_pert_re", format_double(e.lambda_pert.real())},
                         {"lambda_pert_im", format_double(e.lambda_pert.imag())},
                         {"abs_diff", format_double(e.abs_diff)},
                         {"vec_residual", format_double(e.vec_residual)}});
    }
    j["pairs"] = pairs;
    if (rep.quasinilpotence) {
        auto q = nlohmann::ordered_json::array();
        for (double r : *rep.quasinilpotence) q.push_back(format_double(r));
        j["quasinilpotence"] = q;
    }
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << content;
}

}  // namespace report_io
}  // namespace isospec
