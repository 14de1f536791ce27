#pragma once

#include "rampc/ccm.hpp"
#include "rampc/polynomial.hpp"
#include "rampc/polytope.hpp"
#include "rampc/system.hpp"

#include <json.hpp>

#include <set>
#include <string>

namespace rampc {

using json = nlohmann::json;

/// Parse a JSON file; failures become InputError.
json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);
/// Throws InputError naming the first key of j outside `allowed`.
void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where);

Vec vec_from_json(const json& j);
/// Row-major nested list.
Mat mat_from_json(const json& j);
json to_json(const Vec& v);
json mat_to_json(const Mat& M);

MatrixPolynomial matrix_polynomial_from_json(const json& j, int num_vars, int rows, int cols);
json to_json(const MatrixPolynomial& p);

/// {"A","b"} | {"lo","hi"} | {"point"}.
Polytope polytope_from_json(const json& j, int dim);
json to_json(const Polytope& P);

ConstraintFn constraint_from_json(const json& j, int n, int m);
std::vector<ConstraintFn> constraints_from_json(const json& j, int n, int m);

/// {"model": "quadrotor", ...} or {"model": "polynomial", ...}; see README.
UncertainSystem system_from_json(const json& j);

CCM ccm_from_json(const json& j);
json to_json(const CCM& ccm);

} // namespace rampc
