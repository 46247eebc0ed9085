// JSON encoding of matrices, instruments, process tensors, ancilla
// constructions and reports.
//
// Matrix literal: nested arrays of [re, im] pairs, row-major,
//   [[ [1,0], [0,0] ], [ [0,0], [1,0] ]]  is the 2x2 identity.
// All floating point output is rounded to 12 significant digits so that
// serialized reports are reproducible byte for byte.
#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpt/bridge.hpp"
#include "qpt/common.hpp"
#include "qpt/instruments.hpp"
#include "qpt/multitime.hpp"
#include "qpt/process_tensor.hpp"

namespace qpt {

using Json = nlohmann::json;

/// Parse failures carry their own type so callers can map them to a
/// distinct exit status.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Round through a 12-significant-digit decimal representation.
inline double round_significant(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    return std::strtod(buffer, nullptr);
}

inline Json number_json(double value) { return round_significant(value); }

inline Json complex_json(Complex value) {
    return Json::array({round_significant(value.real()), round_significant(value.imag())});
}

inline Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw ParseError("matrix literal must be a nonempty array of rows");
    Index rows = static_cast<Index>(j.size());
    Index cols = -1;
    Matrix m;
    for (Index r = 0; r < rows; ++r) {
        const Json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || row.empty())
            throw ParseError("matrix row must be a nonempty array");
        if (cols < 0) {
            cols = static_cast<Index>(row.size());
            m.resize(rows, cols);
        }
        if (static_cast<Index>(row.size()) != cols)
            throw ParseError("matrix rows have inconsistent lengths");
        for (Index c = 0; c < cols; ++c) {
            const Json& entry = row[static_cast<std::size_t>(c)];
            if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
                !entry[1].is_number())
                throw ParseError("matrix entry must be a [re, im] pair");
            m(r, c) = Complex(entry[0].get<double>(), entry[1].get<double>());
        }
    }
    return m;
}

inline Json operation_to_json(const QuantumOperation& op) {
    Json j;
    Json kraus = Json::array();
    for (const Matrix& k : op.kraus) kraus.push_back(matrix_to_json(k));
    j["kraus"] = std::move(kraus);
    if (!op.label.empty()) j["label"] = op.label;
    return j;
}

inline QuantumOperation operation_from_json(const Json& j, const std::string& label = "") {
    if (!j.is_object() || !j.contains("kraus") || !j["kraus"].is_array() || j["kraus"].empty())
        throw ParseError("operation needs a nonempty 'kraus' array");
    QuantumOperation op;
    op.label = j.value("label", label);
    for (const Json& k : j["kraus"]) op.kraus.push_back(matrix_from_json(k));
    op.dim();  // enforce consistency
    return op;
}

inline Json instrument_to_json(const QuantumInstrument& instrument) {
    Json outcomes = Json::object();
    for (const auto& [label, op] : instrument.outcomes) {
        Json entry;
        Json kraus = Json::array();
        for (const Matrix& k : op.kraus) kraus.push_back(matrix_to_json(k));
        entry["kraus"] = std::move(kraus);
        outcomes[label] = std::move(entry);
    }
    return Json{{"outcomes", std::move(outcomes)}};
}

inline QuantumInstrument instrument_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("outcomes") || !j["outcomes"].is_object() ||
        j["outcomes"].empty())
        throw ParseError("instrument needs a nonempty 'outcomes' object");
    QuantumInstrument instrument;
    for (const auto& [label, entry] : j["outcomes"].items())
        instrument.outcomes[label] = operation_from_json(entry, label);
    instrument.dim();
    return instrument;
}

inline Json process_tensor_to_json(const ProcessTensorSpec& spec) {
    Json j;
    j["d_s"] = spec.d_s;
    j["d_e"] = spec.d_e;
    j["rho_se"] = matrix_to_json(spec.rho_se);
    Json times = Json::array();
    for (double t : spec.times) times.push_back(number_json(t));
    j["times"] = std::move(times);
    Json unitaries = Json::array();
    for (const Matrix& u : spec.interval_unitaries) unitaries.push_back(matrix_to_json(u));
    j["interval_unitaries"] = std::move(unitaries);
    return j;
}

inline ProcessTensorSpec process_tensor_from_json(const Json& j) {
    for (const char* key : {"d_s", "d_e", "rho_se", "times", "interval_unitaries"})
        if (!j.contains(key)) throw ParseError(std::string("process tensor needs '") + key + "'");
    if (!j["d_s"].is_number_integer() || !j["d_e"].is_number_integer())
        throw ParseError("process tensor dimensions must be integers");
    ProcessTensorSpec spec;
    spec.d_s = j["d_s"].get<Index>();
    spec.d_e = j["d_e"].get<Index>();
    spec.rho_se = matrix_from_json(j["rho_se"]);
    if (!j["times"].is_array()) throw ParseError("'times' must be an array");
    for (const Json& t : j["times"]) {
        if (!t.is_number()) throw ParseError("'times' entries must be numbers");
        spec.times.push_back(t.get<double>());
    }
    if (!j["interval_unitaries"].is_array())
        throw ParseError("'interval_unitaries' must be an array");
    for (const Json& u : j["interval_unitaries"])
        spec.interval_unitaries.push_back(matrix_from_json(u));
    return spec;
}

inline Json ancilla_to_json(const AncillaConstruction& anc) {
    Json j;
    j["rho_a"] = matrix_to_json(anc.rho_a);
    auto bank = [](const std::vector<std::vector<Matrix>>& slots) {
        Json out = Json::array();
        for (const auto& slot : slots) {
            Json branch = Json::array();
            for (const Matrix& m : slot) branch.push_back(matrix_to_json(m));
            out.push_back(std::move(branch));
        }
        return out;
    };
    j["V"] = bank(anc.V);
    j["W"] = bank(anc.W);
    return j;
}

inline AncillaConstruction ancilla_from_json(const Json& j) {
    for (const char* key : {"rho_a", "V", "W"})
        if (!j.contains(key))
            throw ParseError(std::string("ancilla construction needs '") + key + "'");
    AncillaConstruction anc;
    anc.rho_a = matrix_from_json(j["rho_a"]);
    auto bank = [](const Json& slots, const char* name) {
        if (!slots.is_array() || slots.empty())
            throw ParseError(std::string("'") + name + "' must be a nonempty array");
        std::vector<std::vector<Matrix>> out;
        for (const Json& slot : slots) {
            if (!slot.is_array() || slot.empty())
                throw ParseError(std::string("'") + name + "' slots must be nonempty arrays");
            std::vector<Matrix> branch;
            for (const Json& m : slot) branch.push_back(matrix_from_json(m));
            out.push_back(std::move(branch));
        }
        return out;
    };
    anc.V = bank(j["V"], "V");
    anc.W = bank(j["W"], "W");
    return anc;
}

inline Json instrument_validation_to_json(const InstrumentValidation& report, double tol) {
    Json j;
    j["has_outcomes"] = report.has_outcomes;
    j["normalization_deviation"] = number_json(report.normalization_deviation);
    Json margins = Json::object();
    for (const auto& [label, margin] : report.trace_margins)
        margins[label] = number_json(margin);
    j["trace_margins"] = std::move(margins);
    j["tolerance"] = number_json(tol);
    j["pass"] = report.ok(tol);
    return j;
}

inline Json audit_to_json(const AuditReport& report, double tol) {
    Json j;
    j["trace_bound_margin"] = number_json(report.trace_bound_margin);
    j["choi_min_eigenvalue"] = number_json(report.choi_min_eigenvalue);
    j["containment_deviation"] = number_json(report.containment_deviation);
    j["tolerance"] = number_json(tol);
    j["pass"] = report.ok(tol);
    return j;
}

inline Json theorem_to_json(const TheoremReport& report, double tol) {
    Json j;
    j["lhs"] = complex_json(report.lhs);
    j["rhs"] = complex_json(report.rhs);
    j["abs_error"] = number_json(report.abs_error);
    j["term_count"] = report.term_count;
    j["tolerance"] = number_json(tol);
    j["pass"] = report.abs_error <= tol;
    return j;
}

/// Leg names and dimensions of a many-body state, slowest factor first.
inline Json choi_layout_json(const ChoiState& choi) {
    Json layout = Json::array();
    layout.push_back(Json{{"leg", "final"}, {"dim", choi.d_s}});
    for (std::size_t j = 1; j <= choi.n_slots; ++j) {
        layout.push_back(Json{{"leg", "in_" + std::to_string(j)}, {"dim", choi.d_s}});
        layout.push_back(Json{{"leg", "out_" + std::to_string(j)}, {"dim", choi.d_s}});
    }
    return layout;
}

}  // namespace qpt
