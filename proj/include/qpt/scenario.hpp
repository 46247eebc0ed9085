// Scenario files: a JSON description of a system, its evolution, a
// measurement schedule and a list of queries, plus the runner that turns
// one into a deterministic report.
//
// Scenario shape:
// {
//   "description": "...",
//   "system": { "d_s": 2 },
//   "environment": { "d_e": 2 },              // optional; default closed
//   "initial_state": <matrix>,                // on system (x) environment
//   "evolution": [ { "t_start": 0.0, "t_end": 1.0, "hamiltonian": <matrix> },
//                  { "t_start": 1.0, "t_end": 2.0, "gate": <matrix> },
//                  { "t_start": 2.0, "hamiltonian": <matrix> } ],
//   "instruments": { "<name>": { "outcomes": { "<label>": { "kraus": [...] } } } },
//   "schedule": [ { "time": 1.0, "instrument": "<name>" },
//                 { "time": 2.0, "observable": <matrix> },
//                 { "time": 3.0, "inline_instrument": { "outcomes": ... } } ],
//   "queries":  [ { "type": "seqprob", "outcomes": ["1", "-1"] }, ... ]
// }
//
// Query types: kernel, seqprob, marginal-gap, qnd, pt-eval, pt-choi,
// pt-audit, bridge-verify. A missing environment behaves as d_e = 1.
#pragma once

#include <chrono>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qpt/bridge.hpp"
#include "qpt/common.hpp"
#include "qpt/evolution.hpp"
#include "qpt/instruments.hpp"
#include "qpt/io.hpp"
#include "qpt/multitime.hpp"
#include "qpt/process_tensor.hpp"
#include "qpt/random.hpp"

namespace qpt {

inline constexpr std::size_t default_tree_cap = 10000;

struct ScheduleEntry {
    enum class Kind { reference, inline_instrument, observable };

    double time = 0.0;
    Kind kind = Kind::reference;
    std::string ref;
    Matrix observable;            // kind == observable
    QuantumInstrument instrument; // resolved, all kinds
};

struct Query {
    std::string type;
    Json params;
};

struct Scenario {
    std::string description;
    Index d_s = 0;
    std::optional<Index> d_e;
    Matrix initial_state;
    std::vector<Segment> segments;
    std::map<std::string, QuantumInstrument> instruments;
    std::vector<ScheduleEntry> schedule;
    std::vector<Query> queries;

    Index env_dim() const { return d_e.value_or(1); }
    Index joint_dim() const { return d_s * env_dim(); }
};

// ---------------------------------------------------------------------------
// parsing and serialization

namespace detail {

inline double number_field(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        throw ParseError(std::string("expected numeric field '") + key + "'");
    return j[key].get<double>();
}

inline Segment segment_from_json(const Json& j) {
    Segment seg;
    seg.t_start = number_field(j, "t_start");
    if (j.contains("t_end"))
        seg.t_end = number_field(j, "t_end");
    else
        seg.t_end = std::numeric_limits<double>::infinity();
    bool has_h = j.contains("hamiltonian");
    bool has_g = j.contains("gate");
    if (has_h == has_g)
        throw ParseError("segment needs exactly one of 'hamiltonian' or 'gate'");
    seg.kind = has_h ? Segment::Kind::hamiltonian : Segment::Kind::gate;
    seg.generator = matrix_from_json(has_h ? j["hamiltonian"] : j["gate"]);
    return seg;
}

inline Json segment_to_json(const Segment& seg) {
    Json j;
    j["t_start"] = number_json(seg.t_start);
    if (!std::isinf(seg.t_end)) j["t_end"] = number_json(seg.t_end);
    if (seg.kind == Segment::Kind::hamiltonian)
        j["hamiltonian"] = matrix_to_json(seg.generator);
    else
        j["gate"] = matrix_to_json(seg.generator);
    return j;
}

}  // namespace detail

inline Scenario parse_scenario(const Json& j) {
    if (!j.is_object()) throw ParseError("scenario must be a JSON object");
    Scenario scenario;
    scenario.description = j.value("description", "");

    if (!j.contains("system") || !j["system"].is_object() ||
        !j["system"].contains("d_s") || !j["system"]["d_s"].is_number_integer())
        throw ParseError("scenario needs system.d_s");
    scenario.d_s = j["system"]["d_s"].get<Index>();

    if (j.contains("environment")) {
        if (!j["environment"].is_object() || !j["environment"].contains("d_e") ||
            !j["environment"]["d_e"].is_number_integer())
            throw ParseError("environment needs d_e");
        scenario.d_e = j["environment"]["d_e"].get<Index>();
    }

    if (!j.contains("initial_state")) throw ParseError("scenario needs initial_state");
    scenario.initial_state = matrix_from_json(j["initial_state"]);

    if (!j.contains("evolution") || !j["evolution"].is_array() || j["evolution"].empty())
        throw ParseError("scenario needs a nonempty evolution array");
    for (const Json& seg : j["evolution"])
        scenario.segments.push_back(detail::segment_from_json(seg));

    if (j.contains("instruments")) {
        if (!j["instruments"].is_object()) throw ParseError("instruments must be an object");
        for (const auto& [name, inst] : j["instruments"].items())
            scenario.instruments[name] = instrument_from_json(inst);
    }

    if (!j.contains("schedule") || !j["schedule"].is_array() || j["schedule"].empty())
        throw ParseError("scenario needs a nonempty schedule");
    for (const Json& entry : j["schedule"]) {
        ScheduleEntry parsed;
        parsed.time = detail::number_field(entry, "time");
        int forms = entry.contains("instrument") + entry.contains("inline_instrument") +
                    entry.contains("observable");
        if (forms != 1)
            throw ParseError(
                "schedule entry needs exactly one of 'instrument', 'inline_instrument' "
                "or 'observable'");
        if (entry.contains("instrument")) {
            if (!entry["instrument"].is_string())
                throw ParseError("schedule 'instrument' must be a name");
            parsed.kind = ScheduleEntry::Kind::reference;
            parsed.ref = entry["instrument"].get<std::string>();
            auto it = scenario.instruments.find(parsed.ref);
            if (it == scenario.instruments.end())
                throw ParseError("schedule references unknown instrument '" + parsed.ref + "'");
            parsed.instrument = it->second;
        } else if (entry.contains("inline_instrument")) {
            parsed.kind = ScheduleEntry::Kind::inline_instrument;
            parsed.instrument = instrument_from_json(entry["inline_instrument"]);
        } else {
            parsed.kind = ScheduleEntry::Kind::observable;
            parsed.observable = matrix_from_json(entry["observable"]);
        }
        scenario.schedule.push_back(std::move(parsed));
    }

    if (j.contains("queries")) {
        if (!j["queries"].is_array()) throw ParseError("queries must be an array");
        for (const Json& q : j["queries"]) {
            if (!q.is_object() || !q.contains("type") || !q["type"].is_string())
                throw ParseError("each query needs a string 'type'");
            Query query;
            query.type = q["type"].get<std::string>();
            query.params = q;
            query.params.erase("type");
            scenario.queries.push_back(std::move(query));
        }
    }
    return scenario;
}

inline Json scenario_to_json(const Scenario& scenario) {
    Json j;
    if (!scenario.description.empty()) j["description"] = scenario.description;
    j["system"] = Json{{"d_s", scenario.d_s}};
    if (scenario.d_e) j["environment"] = Json{{"d_e", *scenario.d_e}};
    j["initial_state"] = matrix_to_json(scenario.initial_state);
    Json evolution = Json::array();
    for (const Segment& seg : scenario.segments)
        evolution.push_back(detail::segment_to_json(seg));
    j["evolution"] = std::move(evolution);
    if (!scenario.instruments.empty()) {
        Json instruments = Json::object();
        for (const auto& [name, inst] : scenario.instruments)
            instruments[name] = instrument_to_json(inst);
        j["instruments"] = std::move(instruments);
    }
    Json schedule = Json::array();
    for (const ScheduleEntry& entry : scenario.schedule) {
        Json e;
        e["time"] = number_json(entry.time);
        switch (entry.kind) {
            case ScheduleEntry::Kind::reference: e["instrument"] = entry.ref; break;
            case ScheduleEntry::Kind::inline_instrument:
                e["inline_instrument"] = instrument_to_json(entry.instrument);
                break;
            case ScheduleEntry::Kind::observable:
                e["observable"] = matrix_to_json(entry.observable);
                break;
        }
        schedule.push_back(std::move(e));
    }
    j["schedule"] = std::move(schedule);
    if (!scenario.queries.empty()) {
        Json queries = Json::array();
        for (const Query& q : scenario.queries) {
            Json entry = q.params;
            entry["type"] = q.type;
            queries.push_back(std::move(entry));
        }
        j["queries"] = std::move(queries);
    }
    return j;
}

// ---------------------------------------------------------------------------
// execution

struct RunOptions {
    double tol = default_tol;
    std::uint64_t seed = 0;
    bool include_timing = true;
    std::size_t tree_cap = default_tree_cap;
    Index dim_cap = default_dimension_cap;
};

/// Scenario pieces resolved into library objects.
struct PreparedScenario {
    EvolutionFamily family;
    std::vector<double> times;
    std::vector<QuantumInstrument> instruments;
    ProcessTensorSpec spec;
};

inline PreparedScenario prepare(const Scenario& scenario, double tol = default_tol) {
    require(scenario.d_s >= 1, "system dimension must be positive");
    require(!scenario.d_e || *scenario.d_e >= 1, "environment dimension must be positive");
    Index d = scenario.joint_dim();
    require(scenario.initial_state.rows() == d && scenario.initial_state.cols() == d,
            "initial state does not match system (x) environment");
    require(is_density(scenario.initial_state, tol),
            "initial state is not a density operator");

    EvolutionFamily family(scenario.segments, tol);
    require(family.dim() == d, "evolution does not match system (x) environment");

    std::vector<double> times;
    std::vector<QuantumInstrument> instruments;
    for (const ScheduleEntry& entry : scenario.schedule) {
        times.push_back(entry.time);
        QuantumInstrument instrument = entry.kind == ScheduleEntry::Kind::observable
                                           ? projective_instrument(entry.observable, tol)
                                           : entry.instrument;
        require(instrument.dim() == scenario.d_s,
                "scheduled instrument does not act on the system");
        InstrumentValidation validation = validate_instrument(instrument);
        require(validation.ok(std::max(tol, 1e-9)),
                "scheduled instrument is not trace-preserving");
        instruments.push_back(std::move(instrument));
    }
    TimeTuple time_tuple(times);  // enforces strict ordering
    require(time_tuple.last() <= family.t_max() ||
                times_equal(time_tuple.last(), family.t_max()),
            "schedule extends past the evolution");

    ProcessTensorSpec spec =
        dilated_spec(scenario.d_s, scenario.env_dim(), scenario.initial_state,
                     interval_unitaries(family, times), times);
    return PreparedScenario{std::move(family), std::move(times), std::move(instruments),
                            std::move(spec)};
}

namespace detail {

inline std::vector<QuantumOperation> resolve_outcomes(
    const PreparedScenario& prep, const Json& params) {
    if (!params.contains("outcomes") || !params["outcomes"].is_array() ||
        params["outcomes"].size() != prep.times.size())
        throw ParseError("query needs one outcome label per scheduled time");
    std::vector<QuantumOperation> ops;
    for (std::size_t k = 0; k < prep.times.size(); ++k) {
        const Json& label = params["outcomes"][k];
        if (!label.is_string()) throw ParseError("outcome labels must be strings");
        const auto& outcomes = prep.instruments[k].outcomes;
        auto it = outcomes.find(label.get<std::string>());
        require(it != outcomes.end(),
                "unknown outcome label '" + label.get<std::string>() + "'");
        ops.push_back(it->second);
    }
    return ops;
}

inline OperatorTuple tuple_from_json(const Json& params, const char* key, Index d_s,
                                     std::size_t n) {
    if (!params.contains(key) || !params[key].is_array() || params[key].size() != n)
        throw ParseError(std::string("query needs '") + key + "' with one matrix per time");
    OperatorTuple tuple;
    for (const Json& m : params[key]) tuple.ops.push_back(matrix_from_json(m));
    require(tuple.dim() == d_s, std::string("'") + key + "' operators must act on the system");
    return tuple;
}

inline bool all_projective(const std::vector<QuantumOperation>& ops, double tol) {
    for (const QuantumOperation& op : ops)
        if (op.kraus.size() != 1 || !is_projector(op.kraus.front(), tol)) return false;
    return true;
}

inline void combine_pass(Json& result, bool ok) {
    if (result.contains("pass"))
        result["pass"] = result["pass"].get<bool>() && ok;
    else
        result["pass"] = ok;
}

/// Queries may pin an expected value; the report then carries a pass flag.
inline void check_expected(Json& result, const Json& params, const char* key,
                           double actual) {
    if (!params.contains(key)) return;
    if (!params[key].is_number()) throw ParseError(std::string(key) + " must be a number");
    double expected = params[key].get<double>();
    double expected_tol = params.value("expected_tol", 1e-9);
    result["expected"] = number_json(expected);
    result["expected_error"] = number_json(std::abs(actual - expected));
    result["expected_tol"] = number_json(expected_tol);
    combine_pass(result, std::abs(actual - expected) <= expected_tol);
}

}  // namespace detail

inline Json run_query(const Scenario& scenario, const PreparedScenario& prep,
                      const Query& query, const RunOptions& options) {
    Json result;
    result["type"] = query.type;
    Index d_e = scenario.env_dim();

    if (query.type == "seqprob") {
        std::vector<QuantumOperation> ops = detail::resolve_outcomes(prep, query.params);
        Complex raw = detail::evaluate_raw(prep.spec, OperationSequence::elementary(ops))
                          .trace();
        double p = clamp_probability(raw, options.tol);
        result["outcomes"] = query.params["outcomes"];
        result["raw"] = complex_json(raw);
        result["probability"] = number_json(p);
        if (detail::all_projective(ops, options.tol)) {
            // second, independent route: Heisenberg-picture kernel on the
            // joint space
            OperatorTuple projectors;
            for (const QuantumOperation& op : ops) projectors.ops.push_back(op.kraus[0]);
            Complex kernel = correlation_kernel(
                prep.family, DensityOperator(scenario.initial_state), TimeTuple(prep.times),
                extend_to_environment(projectors, d_e), extend_to_environment(projectors, d_e));
            double gap = std::abs(kernel - raw);
            result["pyramidal"] = complex_json(kernel);
            result["picture_gap"] = number_json(gap);
            result["tolerance"] = number_json(1e-10);
            result["pass"] = gap <= 1e-10;
        }
        detail::check_expected(result, query.params, "expected", p);
        return result;
    }

    if (query.type == "kernel") {
        OperatorTuple a =
            detail::tuple_from_json(query.params, "a", scenario.d_s, prep.times.size());
        OperatorTuple b =
            detail::tuple_from_json(query.params, "b", scenario.d_s, prep.times.size());
        Complex value = correlation_kernel(
            prep.family, DensityOperator(scenario.initial_state), TimeTuple(prep.times),
            extend_to_environment(a, d_e), extend_to_environment(b, d_e));
        result["value"] = complex_json(value);
        if (query.params.contains("expected")) {
            const Json& e = query.params["expected"];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                throw ParseError("kernel expected value must be [re, im]");
            Complex expected(e[0].get<double>(), e[1].get<double>());
            double expected_tol = query.params.value("expected_tol", 1e-9);
            result["expected"] = complex_json(expected);
            result["expected_error"] = number_json(std::abs(value - expected));
            result["expected_tol"] = number_json(expected_tol);
            detail::combine_pass(result, std::abs(value - expected) <= expected_tol);
        }
        return result;
    }

    if (query.type == "marginal-gap") {
        if (!query.params.contains("outcomes") || !query.params["outcomes"].is_array() ||
            query.params["outcomes"].size() != prep.times.size())
            throw ParseError("marginal-gap needs one outcome (or null) per time");
        std::size_t hole = prep.times.size();
        std::vector<std::string> labels(prep.times.size());
        for (std::size_t k = 0; k < prep.times.size(); ++k) {
            const Json& entry = query.params["outcomes"][k];
            if (entry.is_null()) {
                require(hole == prep.times.size(), "exactly one hole is required");
                hole = k;
            } else if (entry.is_string()) {
                labels[k] = entry.get<std::string>();
            } else {
                throw ParseError("marginal-gap outcomes must be labels or null");
            }
        }
        require(hole < prep.times.size(), "exactly one hole is required");
        if (hole + 1 == prep.times.size())
            throw FinalTimeHoleError("marginalizing the final time is always consistent");

        double summed = 0.0;
        for (const auto& [label, op] : prep.instruments[hole].outcomes) {
            std::vector<std::string> filled = labels;
            filled[hole] = label;
            std::vector<QuantumInstrument> insts(prep.instruments.begin(),
                                                 prep.instruments.end());
            summed += outcome_probability(prep.spec, insts, filled, options.tol);
        }

        std::vector<double> reduced_times;
        std::vector<QuantumInstrument> reduced_instruments;
        std::vector<std::string> reduced_labels;
        for (std::size_t k = 0; k < prep.times.size(); ++k) {
            if (k == hole) continue;
            reduced_times.push_back(prep.times[k]);
            reduced_instruments.push_back(prep.instruments[k]);
            reduced_labels.push_back(labels[k]);
        }
        ProcessTensorSpec reduced_spec =
            dilated_spec(scenario.d_s, d_e, scenario.initial_state,
                         interval_unitaries(prep.family, reduced_times), reduced_times);
        double reduced =
            outcome_probability(reduced_spec, reduced_instruments, reduced_labels, options.tol);

        result["hole"] = hole;
        result["summed"] = number_json(summed);
        result["reduced"] = number_json(reduced);
        result["gap"] = number_json(summed - reduced);
        detail::check_expected(result, query.params, "expected_gap", summed - reduced);
        return result;
    }

    if (query.type == "qnd") {
        Matrix observable;
        if (query.params.contains("observable")) {
            observable = matrix_from_json(query.params["observable"]);
        } else {
            for (const ScheduleEntry& entry : scenario.schedule) {
                require(entry.kind == ScheduleEntry::Kind::observable,
                        "qnd query without 'observable' needs an observable schedule");
                if (observable.size() == 0)
                    observable = entry.observable;
                else
                    require(max_abs(observable - entry.observable) <= options.tol,
                            "qnd query needs one common observable");
            }
        }
        require(observable.rows() == scenario.d_s, "qnd observable must act on the system");
        Matrix extended = tensor(observable, Matrix::Identity(d_e, d_e));
        QndReport report = qnd_check(prep.family, TimeTuple(prep.times), extended, options.tol);
        double threshold = query.params.value("threshold", 1e-12);
        bool qnd = report.max_commutator_norm <= threshold;
        result["max_commutator_norm"] = number_json(report.max_commutator_norm);
        result["pairs_checked"] = report.pairs_checked;
        result["threshold"] = number_json(threshold);
        result["qnd"] = qnd;
        if (query.params.contains("expect")) {
            if (!query.params["expect"].is_boolean())
                throw ParseError("qnd 'expect' must be a boolean");
            bool expect = query.params["expect"].get<bool>();
            result["expect"] = expect;
            detail::combine_pass(result, qnd == expect);
        }
        return result;
    }

    if (query.type == "pt-eval") {
        std::vector<QuantumOperation> ops = detail::resolve_outcomes(prep, query.params);
        Matrix state = evaluate(prep.spec, OperationSequence::elementary(ops), options.tol);
        Complex raw = state.trace();
        double p = clamp_probability(raw, options.tol);
        result["outcomes"] = query.params["outcomes"];
        result["raw"] = complex_json(raw);
        result["probability"] = number_json(p);
        if (p >= probability_floor)
            result["conditional_state"] = matrix_to_json(state / p);
        else
            result["conditional_state"] = nullptr;
        detail::check_expected(result, query.params, "expected", p);
        return result;
    }

    if (query.type == "pt-choi") {
        ChoiState choi = choi_state(prep.spec, options.dim_cap, options.tol);
        Rng rng(options.seed + 17);
        double worst = 0.0;
        for (int probe = 0; probe < 3; ++probe) {
            std::vector<QuantumOperation> ops;
            for (std::size_t j = 0; j < prep.spec.n_slots(); ++j)
                ops.push_back(random_operation(rng, scenario.d_s, 2, probe % 2 == 0));
            Complex via_choi = contract_with_operations(choi, ops);
            Complex via_eval =
                evaluate(prep.spec, OperationSequence::elementary(ops), options.tol).trace();
            worst = std::max(worst, std::abs(via_choi - via_eval));
        }
        result["dim"] = choi.matrix.rows();
        result["n_slots"] = choi.n_slots;
        result["leg_layout"] = choi_layout_json(choi);
        result["trace"] = complex_json(choi.matrix.trace());
        result["min_eigenvalue"] = number_json(min_eigenvalue(choi.matrix));
        result["contraction_error"] = number_json(worst);
        result["tolerance"] = number_json(1e-8);
        result["pass"] = worst <= 1e-8 && min_eigenvalue(choi.matrix) >= -1e-8;
        if (query.params.value("include_matrix", false))
            result["matrix"] = matrix_to_json(choi.matrix);
        return result;
    }

    if (query.type == "pt-audit") {
        int trials = query.params.value("trials", 6);
        AuditReport report = audit_properties(prep.spec, options.seed + 23, trials,
                                              options.dim_cap);
        result.update(audit_to_json(report, 1e-8));
        return result;
    }

    if (query.type == "bridge-verify") {
        Dilation dilation{scenario.d_s, d_e, scenario.initial_state, prep.family};
        OperatorTuple a, b;
        if (query.params.contains("a") || query.params.contains("b")) {
            a = detail::tuple_from_json(query.params, "a", scenario.d_s, prep.times.size());
            b = detail::tuple_from_json(query.params, "b", scenario.d_s, prep.times.size());
        } else {
            Rng rng(options.seed + 31);
            for (std::size_t k = 0; k < prep.times.size(); ++k) {
                a.ops.push_back(random_matrix(rng, scenario.d_s, scenario.d_s));
                b.ops.push_back(random_matrix(rng, scenario.d_s, scenario.d_s));
            }
        }
        TheoremReport report = verify_theorem1(dilation, TimeTuple(prep.times), a, b);
        result.update(theorem_to_json(report, 1e-8));
        return result;
    }

    throw ParseError("unknown query type '" + query.type + "'");
}

struct RunResult {
    Json report;
    bool all_passed = true;
};

inline RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
    auto started = std::chrono::steady_clock::now();
    PreparedScenario prep = prepare(scenario, options.tol);

    RunResult out;
    Json results = Json::array();
    for (const Query& query : scenario.queries) {
        Json result = run_query(scenario, prep, query, options);
        if (result.contains("pass") && !result["pass"].get<bool>()) out.all_passed = false;
        results.push_back(std::move(result));
    }

    out.report["description"] = scenario.description;
    out.report["seed"] = options.seed;
    out.report["tolerance"] = number_json(options.tol);
    out.report["results"] = std::move(results);
    if (options.include_timing) {
        double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - started)
                        .count();
        out.report["wall_time_ms"] = number_json(ms);
    }
    return out;
}

// ---------------------------------------------------------------------------
// outcome tree

struct TreeResult {
    std::vector<std::string> column_labels;  // outcome_1 ... outcome_n
    std::vector<std::vector<std::string>> rows;
    std::vector<double> probabilities;
    double total = 0.0;
};

inline TreeResult enumerate_tree(const Scenario& scenario, const RunOptions& options) {
    PreparedScenario prep = prepare(scenario, options.tol);
    std::size_t n = prep.times.size();

    std::size_t leaves = 1;
    for (const QuantumInstrument& inst : prep.instruments) {
        leaves *= inst.outcomes.size();
        if (leaves > options.tree_cap)
            throw DimensionCapError("outcome tree exceeds the leaf cap");
    }

    TreeResult tree;
    for (std::size_t k = 1; k <= n; ++k)
        tree.column_labels.push_back("outcome_" + std::to_string(k));

    // depth-first with in-place state propagation; the state at depth j has
    // already absorbed evolution and outcomes up to slot j
    std::vector<std::string> path(n);
    auto descend = [&](auto&& self, std::size_t j, const Matrix& sigma) -> void {
        if (j == n) {
            double p = clamp_probability(sigma.trace(), std::max(options.tol, 1e-9));
            tree.rows.push_back(path);
            tree.probabilities.push_back(p);
            tree.total += p;
            return;
        }
        const Matrix& u = prep.spec.interval_unitaries[j];
        Matrix evolved = u * sigma * u.adjoint();
        for (const auto& [label, op] : prep.instruments[j].outcomes) {
            path[j] = label;
            self(self, j + 1, detail::apply_on_system(op, evolved, prep.spec.d_e));
        }
    };
    descend(descend, 0, scenario.initial_state);
    return tree;
}

inline std::string tree_to_csv(const TreeResult& tree) {
    std::string csv;
    for (const std::string& label : tree.column_labels) csv += label + ",";
    csv += "probability\n";
    char buffer[40];
    for (std::size_t r = 0; r < tree.rows.size(); ++r) {
        for (const std::string& cell : tree.rows[r]) csv += cell + ",";
        std::snprintf(buffer, sizeof(buffer), "%.12g", tree.probabilities[r]);
        csv += buffer;
        csv += "\n";
    }
    return csv;
}

inline Json tree_to_json(const TreeResult& tree) {
    Json j;
    Json rows = Json::array();
    for (std::size_t r = 0; r < tree.rows.size(); ++r) {
        Json row;
        row["outcomes"] = tree.rows[r];
        row["probability"] = number_json(tree.probabilities[r]);
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    j["leaf_count"] = tree.rows.size();
    j["total"] = number_json(tree.total);
    j["normalization_error"] = number_json(std::abs(tree.total - 1.0));
    j["tolerance"] = number_json(1e-9);
    j["pass"] = std::abs(tree.total - 1.0) <= 1e-9;
    return j;
}

// ---------------------------------------------------------------------------
// plotting

/// Minimal static bar chart, one bar per labelled value in [0, 1].
inline std::string svg_bar_chart(const std::vector<std::string>& labels,
                                 const std::vector<double>& values,
                                 const std::string& title) {
    require(labels.size() == values.size(), "labels and values must pair up");
    const int width = 640, height = 360, margin = 40;
    const int plot_w = width - 2 * margin, plot_h = height - 2 * margin;
    std::string svg;
    char buffer[256];
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"360\">\n";
    std::snprintf(buffer, sizeof(buffer),
                  "<text x=\"%d\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">",
                  margin);
    svg += buffer;
    svg += title + "</text>\n";
    std::snprintf(buffer, sizeof(buffer),
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n",
                  margin, height - margin, width - margin, height - margin);
    svg += buffer;

    std::size_t n = values.size();
    if (n > 0) {
        double bar_w = static_cast<double>(plot_w) / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
            double v = std::min(std::max(values[k], 0.0), 1.0);
            double h = v * plot_h;
            double x = margin + k * bar_w + 0.1 * bar_w;
            double y = height - margin - h;
            std::snprintf(buffer, sizeof(buffer),
                          "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" "
                          "fill=\"steelblue\"/>\n",
                          x, y, 0.8 * bar_w, h);
            svg += buffer;
            std::snprintf(buffer, sizeof(buffer),
                          "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" "
                          "font-size=\"10\" text-anchor=\"middle\">%.4g</text>\n",
                          x + 0.4 * bar_w, y - 4.0, values[k]);
            svg += buffer;
            std::snprintf(buffer, sizeof(buffer),
                          "<text x=\"%.1f\" y=\"%d\" font-family=\"sans-serif\" "
                          "font-size=\"10\" text-anchor=\"middle\">",
                          x + 0.4 * bar_w, height - margin + 14);
            svg += buffer;
            std::string label = labels[k].substr(0, 12);
            svg += label + "</text>\n";
        }
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace qpt
