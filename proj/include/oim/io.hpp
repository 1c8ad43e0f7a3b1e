#pragma once

#include <json.hpp>

#include <oim/analysis.hpp>
#include <oim/measures.hpp>
#include <oim/poset.hpp>

namespace oim {

using json = nlohmann::ordered_json;

// ---- probabilities ---------------------------------------------------------
//
// Exact rationals serialize as {"num","den"} with decimal strings; values in
// the quadratic field serialize as (p + q*sqrt(surd)) / r with integer p, q
// and positive integer r.  Floats are display-only and always accompany the
// exact record, never replace it.

inline json prob_to_json(const Prob& p) {
    json j;
    j["grade"] = grade_name(p.grade());
    j["float"] = p.to_double();
    if (p.grade() == Grade::exact_rational) {
        mpq_class v = p.exact().as_rational();
        j["num"] = v.get_num().get_str();
        j["den"] = v.get_den().get_str();
    } else if (p.grade() == Grade::exact_quadratic) {
        Quad v = p.exact();
        mpz_class r = lcm(v.rational_part().get_den(), v.surd_part().get_den());
        mpq_class ps = v.rational_part() * mpq_class(r), qs = v.surd_part() * mpq_class(r);
        ps.canonicalize();
        qs.canonicalize();
        j["p"] = ps.get_num().get_str();
        j["q"] = qs.get_num().get_str();
        j["r"] = r.get_str();
        j["surd"] = 5;
    } else {
        j["err"] = p.err();
    }
    return j;
}

inline Prob prob_from_json(const json& j) {
    if (j.contains("num")) {
        mpq_class v(mpz_class(j.at("num").get<std::string>()), mpz_class(j.at("den").get<std::string>()));
        v.canonicalize();
        return Prob::rational(v);
    }
    if (j.contains("surd")) {
        if (j.at("surd").get<int>() != 5) throw UsageError("only surd 5 is supported");
        mpz_class r(j.at("r").get<std::string>());
        mpq_class a(mpz_class(j.at("p").get<std::string>()), r), b(mpz_class(j.at("q").get<std::string>()), r);
        a.canonicalize();
        b.canonicalize();
        return Prob::quadratic(Quad(a, b));
    }
    Grade g = j.value("grade", std::string("float")) == "monte-carlo" ? Grade::monte_carlo : Grade::floating;
    return Prob::approximate(j.at("float").get<double>(), j.value("err", 0.0), g);
}

// ---- posets ----------------------------------------------------------------

inline json poset_to_json(const FinitePoset& p, const std::string& family = "") {
    json j;
    if (!family.empty()) j["family"] = family;
    json elems = json::array(), covers = json::array();
    for (std::size_t i = 0; i < p.n(); ++i) elems.push_back(p.id(i));
    for (std::size_t v = 0; v < p.n(); ++v)
        for (std::size_t u : p.lower_covers(v)) covers.push_back(json::array({p.id(u), p.id(v)}));
    j["elements"] = std::move(elems);
    j["covers"] = std::move(covers);
    return j;
}

inline FinitePoset poset_from_json(const json& j) {
    std::vector<ElementId> elems = j.at("elements").get<std::vector<ElementId>>();
    std::vector<std::pair<ElementId, ElementId>> covers;
    for (const json& c : j.at("covers")) covers.emplace_back(c.at(0).get<ElementId>(), c.at(1).get<ElementId>());
    return build_finite_poset(elems, covers);
}

// ---- reports ---------------------------------------------------------------

inline json check_report_to_json(const CheckReport& r) {
    json j;
    j["property"] = r.property;
    j["depth"] = r.depth;
    j["grade"] = grade_name(r.grade);
    if (r.residual_rational) {
        j["residual_num"] = r.residual_rational->get_num().get_str();
        j["residual_den"] = r.residual_rational->get_den().get_str();
    } else {
        j["residual_float"] = r.residual_float;
    }
    j["verdict"] = r.pass ? "pass" : "fail";
    j["witnesses"] = r.witnesses;
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

inline json convergence_report_to_json(const ConvergenceReport& r) {
    json j;
    j["exhaustion"] = r.exhaustion;
    j["verdict"] = verdict_name(r.verdict);
    j["tol"] = r.tol;
    if (r.verdict == Verdict::converged) j["limit"] = r.limit;
    if (r.verdict == Verdict::oscillating) j["gap"] = r.gap;
    json rows = json::array();
    for (const auto& [n, v] : r.seq)
        rows.push_back({{"n", n},
                        {"num", v.get_num().get_str()},
                        {"den", v.get_den().get_str()},
                        {"float", v.get_d()}});
    j["rows"] = std::move(rows);
    return j;
}

inline json essentiality_report_to_json(const EssentialityReport& r) {
    json j = check_report_to_json(r.report);
    json rows = json::array();
    for (const auto& [k, mean, mad] : r.table) rows.push_back({{"k", k}, {"mean", mean}, {"mad", mad}});
    j["rows"] = std::move(rows);
    return j;
}

// ---- emission --------------------------------------------------------------

enum class OutputFormat { structured, csv };

/// Lossless, byte-stable rendering.  CSV applies to reports carrying a row
/// table; everything else falls back to the structured form.
inline std::string emit(const json& j, OutputFormat fmt = OutputFormat::structured) {
    if (fmt == OutputFormat::structured) return j.dump(2) + "\n";
    std::string out;
    auto cell = [](const json& v) {
        return v.is_string() ? v.get<std::string>() : v.dump();
    };
    if (j.contains("rows") && j.at("rows").is_array() && !j.at("rows").empty()) {
        const json& rows = j.at("rows");
        std::vector<std::string> keys;
        for (auto it = rows.front().begin(); it != rows.front().end(); ++it) keys.push_back(it.key());
        for (std::size_t i = 0; i < keys.size(); ++i) out += (i ? "," : "") + keys[i];
        out += "\n";
        for (const json& row : rows) {
            for (std::size_t i = 0; i < keys.size(); ++i) out += (i ? "," : "") + cell(row.at(keys[i]));
            out += "\n";
        }
        return out;
    }
    for (auto it = j.begin(); it != j.end(); ++it)
        out += it.key() + "," + cell(it.value()) + "\n";
    return out;
}

} // namespace oim
