#pragma once

// JSON forms of polynomials, problems, quantum inputs, task envelopes and
// relaxation dumps. Every loader validates and throws InputError with the
// offending path in the message.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "momentsdp/entangle.hpp"
#include "momentsdp/lasserre.hpp"
#include "momentsdp/polycore.hpp"
#include "momentsdp/quantum.hpp"
#include "momentsdp/sdp.hpp"

namespace momentsdp::io {

using nlohmann::json;

// {"vars": t, "terms": [{"exp": [...], "coef": c}, ...]}, terms in basis
// order. Duplicate exponent vectors are rejected on load.
json to_json(const Polynomial& p);
Polynomial polynomial_from_json(const json& j);

// {"vars": t, "objective": <poly>, "constraints": [{"type": "ge"|"eq",
//  "poly": <poly>, "label": s}], "ball_radius_sq": a2}. Inner polynomials may
// omit "vars".
json to_json(const lasserre::PolyProblem& p);
lasserre::PolyProblem problem_from_json(const json& j);

// {"dims": [...], "amplitudes": [[re, im], ...]}. Amplitudes must be
// normalized unless "normalize": true.
json to_json(const quantum::StateVector& s);
quantum::StateVector state_from_json(const json& j);

// Dense complex matrix: rows of entries, each [re, im] or a real number.
json matrix_to_json(const quantum::CMatrix& m);
quantum::CMatrix matrix_from_json(const json& j, const std::string& where = "matrix");

// {"dims": [...], "matrix": <rows>}; must be Hermitian.
json operator_to_json(const quantum::CMatrix& m, const quantum::SubsystemLayout& layout);
quantum::CMatrix operator_from_json(const json& j, quantum::SubsystemLayout& layout);

// {"dims": [...], "kraus": [<rows>, ...]}; completeness is checked.
json kraus_to_json(const std::vector<quantum::CMatrix>& kraus, const quantum::SubsystemLayout& layout);
std::vector<quantum::CMatrix> kraus_from_json(const json& j, quantum::SubsystemLayout& layout);

struct TaskFile {
  entangle::Task task;
  std::optional<int> order;
  std::optional<int> max_order;
};

// {"task": name, "input": <state|operator|kraus>, "options": {"order": h,
//  "max_order": h, "n": terms, "symmetric": bool | [group per party]}}.
// symmetric = true ties every party to the first one of equal dimension.
TaskFile task_from_json(const json& j);
json to_json(const TaskFile& t);

// Blocks as (row, col, y-ordinal, coefficient) quadruples, upper triangle.
// Ordinal 0 is the constant term; ordinal k >= 1 is y_k, i.e. instance
// variable k - 1.
json relaxation_dump(const sdp::SdpInstance& inst);
sdp::SdpInstance instance_from_dump(const json& j);

// One line per iteration: iter pobj dobj relgap pres dres mu ap ad.
void write_trace(std::ostream& out, const std::vector<sdp::IterationRecord>& history);

// File helpers; parse errors become InputError.
json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace momentsdp::io
