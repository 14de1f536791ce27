#include "rampc/io.hpp"
#include "rampc/quadrotor.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <set>

namespace rampc {

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j)
{
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << j.dump(2) << '\n';
}

namespace {

double bound_value(const json& j, double missing)
{
    if (j.is_null()) return missing;
    return j.get<double>();
}

Vec bounds_from_json(const json& j, Eigen::Index n, double missing)
{
    Vec v = Vec::Constant(n, missing);
    if (j.is_null()) return v;
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) throw InputError("bound list has wrong length");
    for (Eigen::Index i = 0; i < n; ++i) v(i) = bound_value(j[static_cast<std::size_t>(i)], missing);
    return v;
}

} // namespace

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
    if (!j.is_object()) throw InputError(where + ": expected an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw InputError(where + ": unknown key '" + key + "'");
}

Vec vec_from_json(const json& j)
{
    if (j.is_number()) return Vec::Constant(1, j.get<double>());
    if (!j.is_array()) throw InputError("expected a numeric list");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

Mat mat_from_json(const json& j)
{
    if (!j.is_array()) throw InputError("expected a nested list for a matrix");
    if (j.empty()) return Mat(0, 0);
    const auto rows = j.size();
    const auto cols = j[0].size();
    Mat M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw InputError("ragged matrix");
        for (std::size_t c = 0; c < cols; ++c)
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
    return M;
}

json to_json(const Vec& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json mat_to_json(const Mat& M)
{
    json out = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) out.push_back(to_json(Vec(M.row(r).transpose())));
    return out;
}

Polytope polytope_from_json(const json& j, int dim)
{
    if (!j.is_object()) throw InputError("polytope must be an object");
    Polytope P;
    if (j.contains("A")) {
        reject_unknown(j, {"A", "b"}, "polytope");
        Mat A = mat_from_json(j.at("A"));
        if (A.size() == 0) A.resize(0, dim);
        P = Polytope(A, vec_from_json(j.at("b")));
    } else if (j.contains("lo")) {
        reject_unknown(j, {"lo", "hi"}, "polytope");
        P = Polytope::box(vec_from_json(j.at("lo")), vec_from_json(j.at("hi")));
    } else if (j.contains("point")) {
        reject_unknown(j, {"point"}, "polytope");
        P = Polytope::point(vec_from_json(j.at("point")));
    } else {
        throw InputError("polytope needs A/b, lo/hi or point");
    }
    if (P.dim() != dim) throw InputError("polytope has dimension " + std::to_string(P.dim()) + ", expected " +
                                         std::to_string(dim));
    return P;
}

json to_json(const Polytope& P)
{
    return {{"A", mat_to_json(P.A)}, {"b", to_json(P.b)}};
}

ConstraintFn constraint_from_json(const json& j, int n, int m)
{
    const std::string type = j.value("type", "");
    const std::string name = j.value("name", type);
    if (type == "affine") {
        reject_unknown(j, {"type", "name", "a_x", "a_u", "b"}, "affine constraint");
        Vec ax = j.contains("a_x") ? vec_from_json(j.at("a_x")) : Vec(Vec::Zero(n));
        Vec au = j.contains("a_u") ? vec_from_json(j.at("a_u")) : Vec(Vec::Zero(m));
        if (ax.size() != n || au.size() != m) throw InputError("affine constraint has wrong gradient size");
        return affine_constraint(name, ax, au, j.at("b").get<double>());
    }
    if (type == "disc") {
        reject_unknown(j, {"type", "name", "idx", "center", "radius"}, "disc constraint");
        auto idx = j.at("idx").get<std::vector<int>>();
        for (int i : idx)
            if (i < 0 || i >= n) throw InputError("disc constraint index out of range");
        return keep_out_disc(name, n, m, idx, vec_from_json(j.at("center")), j.at("radius").get<double>());
    }
    throw InputError("unknown constraint type '" + type + "'");
}

std::vector<ConstraintFn> constraints_from_json(const json& j, int n, int m)
{
    std::vector<ConstraintFn> out;
    if (j.is_null()) return out;
    if (!j.is_array()) throw InputError("constraints must be a list");
    for (const auto& c : j) {
        if (c.value("type", "") == "box") {
            reject_unknown(c, {"type", "x_lo", "x_hi", "u_lo", "u_hi"}, "box constraint");
            const double inf = std::numeric_limits<double>::infinity();
            auto rows = box_constraints(bounds_from_json(c.value("x_lo", json()), n, -inf),
                                        bounds_from_json(c.value("x_hi", json()), n, inf),
                                        bounds_from_json(c.value("u_lo", json()), m, -inf),
                                        bounds_from_json(c.value("u_hi", json()), m, inf));
            out.insert(out.end(), rows.begin(), rows.end());
        } else {
            out.push_back(constraint_from_json(c, n, m));
        }
    }
    return out;
}

namespace {

struct PolySystem {
    MatrixPolynomial f, B, G0, E;
    std::vector<MatrixPolynomial> Gu;
};

UncertainSystem polynomial_system(const json& j)
{
    reject_unknown(j, {"model", "n", "m", "p", "q", "state_names", "f", "B", "G", "E", "constraints", "Theta0", "D",
                       "D_eps", "sample_box"},
                   "polynomial system");
    UncertainSystem s;
    s.n = j.at("n").get<int>();
    s.m = j.at("m").get<int>();
    s.p = j.value("p", 0);
    s.q = j.value("q", 0);
    const int n = s.n, m = s.m, p = s.p, q = s.q;
    if (n <= 0 || m <= 0 || p < 0 || q < 0) throw InputError("polynomial system: invalid dimensions");
    if (j.contains("state_names")) s.state_names = j.at("state_names").get<std::vector<std::string>>();

    auto P = std::make_shared<PolySystem>();
    auto poly = [&](const char* key, int rows, int cols) {
        if (!j.contains(key)) return MatrixPolynomial(n, rows, cols);
        return matrix_polynomial_from_json(j.at(key), n, rows, cols);
    };
    P->f = poly("f", n, 1);
    P->B = poly("B", n, m);
    P->E = poly("E", n, q);
    P->G0 = MatrixPolynomial(n, n, p);
    if (j.contains("G")) {
        const auto& g = j.at("G");
        reject_unknown(g, {"const", "u"}, "G");
        if (g.contains("const")) P->G0 = matrix_polynomial_from_json(g.at("const"), n, n, p);
        if (g.contains("u")) {
            if (!g.at("u").is_array() || static_cast<int>(g.at("u").size()) != m)
                throw InputError("G.u must hold one polynomial per input");
            for (const auto& gi : g.at("u")) P->Gu.push_back(matrix_polynomial_from_json(gi, n, n, p));
        }
    }

    s.f = [P](const Vec& x) { return Vec(P->f.eval(x).col(0)); };
    s.B = [P](const Vec& x) { return P->B.eval(x); };
    s.E = [P](const Vec& x) { return P->E.eval(x); };
    s.G = [P](const Vec& x, const Vec& u) {
        Mat G = P->G0.eval(x);
        for (std::size_t i = 0; i < P->Gu.size(); ++i) G += u(static_cast<Eigen::Index>(i)) * P->Gu[i].eval(x);
        return G;
    };
    s.jacobian = [P, n, m, p, q](const Vec& x, const Vec& u, const Vec& theta, const Vec& d) {
        Jacobians J{Mat::Zero(n, n), P->B.eval(x)};
        for (std::size_t i = 0; i < P->Gu.size(); ++i)
            if (p > 0) J.Bu.col(static_cast<Eigen::Index>(i)) += P->Gu[i].eval(x) * theta;
        for (int k = 0; k < n; ++k) {
            Vec col = P->f.partial(x, k).col(0) + P->B.partial(x, k) * u;
            if (p > 0) {
                Mat dG = P->G0.partial(x, k);
                for (std::size_t i = 0; i < P->Gu.size(); ++i)
                    dG += u(static_cast<Eigen::Index>(i)) * P->Gu[i].partial(x, k);
                col += dG * theta;
            }
            if (q > 0) col += P->E.partial(x, k) * d;
            J.A.col(k) = col;
        }
        return J;
    };

    s.constraints = constraints_from_json(j.value("constraints", json()), n, m);
    s.Theta0 = p > 0 ? polytope_from_json(j.at("Theta0"), p) : Polytope::whole_space(0);
    s.D = q > 0 ? polytope_from_json(j.at("D"), q) : Polytope::whole_space(0);
    s.D_eps = j.contains("D_eps") ? polytope_from_json(j.at("D_eps"), n) : Polytope::point(Vec::Zero(n));
    if (p > 0) s.Theta0 = with_vertices(s.Theta0);
    if (q > 0) s.D = with_vertices(s.D);
    const auto& box = j.at("sample_box");
    s.sample_lo = vec_from_json(box.at("lo"));
    s.sample_hi = vec_from_json(box.at("hi"));
    s.validate();
    return s;
}

UncertainSystem quadrotor_from_json(const json& j)
{
    reject_unknown(j, {"model", "params", "extra_constraints"}, "quadrotor system");
    QuadrotorParams P;
    if (j.contains("params")) {
        const auto& pj = j.at("params");
        reject_unknown(pj, {"g", "m", "l", "J", "theta_bar0", "theta_rel_width", "d_max", "eps_max", "p_range",
                            "theta_true"},
                       "quadrotor params");
        P.g = pj.value("g", P.g);
        P.m = pj.value("m", P.m);
        if (pj.contains("theta_true")) P.m = 1.0 / pj.at("theta_true").get<double>();
        P.l = pj.value("l", P.l);
        P.J = pj.value("J", P.J);
        P.theta_bar0 = pj.value("theta_bar0", P.theta_bar0);
        P.theta_rel_width = pj.value("theta_rel_width", P.theta_rel_width);
        P.d_max = pj.value("d_max", P.d_max);
        P.eps_max = pj.value("eps_max", P.eps_max);
        P.p_range = pj.value("p_range", P.p_range);
    }
    UncertainSystem s = quadrotor_model(P);
    auto extra = constraints_from_json(j.value("extra_constraints", json()), s.n, s.m);
    s.constraints.insert(s.constraints.end(), extra.begin(), extra.end());
    return s;
}

} // namespace

UncertainSystem system_from_json(const json& j)
{
    try {
        const std::string model = j.value("model", "polynomial");
        if (model == "quadrotor") return quadrotor_from_json(j);
        if (model == "polynomial") return polynomial_system(j);
        throw InputError("unknown system model '" + model + "'");
    } catch (const json::exception& e) {
        throw InputError(std::string("system definition: ") + e.what());
    } catch (const ContractViolation& e) {
        throw InputError(std::string("system definition: ") + e.what());
    }
}

CCM ccm_from_json(const json& j)
{
    try {
        const int n = j.at("n").get<int>();
        const int m = j.at("m").get<int>();
        CCM c;
        c.W = matrix_polynomial_from_json(j.at("W"), n, n, n);
        c.Y = matrix_polynomial_from_json(j.at("Y"), n, m, n);
        c.rho_c = j.at("rho_c").get<double>();
        if (j.contains("M_lower")) c.M_lower = mat_from_json(j.at("M_lower"));
        if (j.contains("M_upper")) c.M_upper = mat_from_json(j.at("M_upper"));
        if (j.contains("metadata")) c.metadata = j.at("metadata").dump();
        c.prepare();
        return c;
    } catch (const json::exception& e) {
        throw InputError(std::string("CCM certificate: ") + e.what());
    } catch (const ContractViolation& e) {
        throw InputError(std::string("CCM certificate: ") + e.what());
    }
}

json to_json(const CCM& c)
{
    json j = {{"format", "rampc-ccm/1"}, {"n", c.n()}, {"m", c.m()}, {"rho_c", c.rho_c},
              {"W", to_json(c.W)},        {"Y", to_json(c.Y)}};
    if (c.has_bounds()) {
        j["M_lower"] = mat_to_json(c.M_lower);
        j["M_upper"] = mat_to_json(c.M_upper);
    }
    if (!c.metadata.empty()) j["metadata"] = json::parse(c.metadata);
    return j;
}

} // namespace rampc
