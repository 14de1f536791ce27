#include "rampc/polynomial.hpp"
#include "rampc/io.hpp"

#include <algorithm>
#include <cmath>

namespace rampc {

namespace {

double monomial(const std::vector<int>& exps, const Vec& x)
{
    double v = 1.0;
    for (std::size_t i = 0; i < exps.size(); ++i) {
        for (int k = 0; k < exps[i]; ++k) v *= x[static_cast<Eigen::Index>(i)];
    }
    return v;
}

Mat matrix_from_json(const json& j, int rows, int cols)
{
    Mat out(rows, cols);
    // a flat vector is accepted for column-shaped coefficients
    if (cols == 1 && j.is_array() && !j.empty() && j[0].is_number()) {
        require(static_cast<int>(j.size()) == rows, "polynomial coefficient has wrong length");
        for (int r = 0; r < rows; ++r) out(r, 0) = j[static_cast<std::size_t>(r)].get<double>();
        return out;
    }
    require(j.is_array() && static_cast<int>(j.size()) == rows, "polynomial coefficient has wrong row count");
    for (int r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (cols == 1 && row.is_number()) {
            out(r, 0) = row.get<double>();
            continue;
        }
        require(row.is_array() && static_cast<int>(row.size()) == cols, "polynomial coefficient has wrong column count");
        for (int c = 0; c < cols; ++c) out(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return out;
}

} // namespace

MatrixPolynomial::MatrixPolynomial(int num_vars, int rows, int cols)
    : num_vars_(num_vars), rows_(rows), cols_(cols)
{
}

MatrixPolynomial MatrixPolynomial::constant(int num_vars, const Mat& value)
{
    MatrixPolynomial p(num_vars, static_cast<int>(value.rows()), static_cast<int>(value.cols()));
    p.add_term(std::vector<int>(static_cast<std::size_t>(num_vars), 0), value);
    return p;
}

void MatrixPolynomial::add_term(std::vector<int> exponents, const Mat& coeff)
{
    require(static_cast<int>(exponents.size()) == num_vars_, "monomial exponent list has wrong length");
    require(coeff.rows() == rows_ && coeff.cols() == cols_, "monomial coefficient has wrong shape");
    for (int e : exponents) require(e >= 0, "negative monomial exponent");
    for (auto& t : terms_) {
        if (t.exponents == exponents) {
            t.coeff += coeff;
            return;
        }
    }
    terms_.push_back({std::move(exponents), coeff});
}

Mat MatrixPolynomial::eval(const Vec& x) const
{
    require_size(x.size(), num_vars_, "MatrixPolynomial::eval");
    Mat out = Mat::Zero(rows_, cols_);
    for (const auto& t : terms_) out.noalias() += monomial(t.exponents, x) * t.coeff;
    return out;
}

Mat MatrixPolynomial::partial(const Vec& x, int var) const
{
    require_size(x.size(), num_vars_, "MatrixPolynomial::partial");
    Mat out = Mat::Zero(rows_, cols_);
    const auto v = static_cast<std::size_t>(var);
    for (const auto& t : terms_) {
        const int e = t.exponents[v];
        if (e == 0) continue;
        double c = e;
        for (std::size_t i = 0; i < t.exponents.size(); ++i) {
            const int ei = (i == v) ? e - 1 : t.exponents[i];
            for (int k = 0; k < ei; ++k) c *= x[static_cast<Eigen::Index>(i)];
        }
        out.noalias() += c * t.coeff;
    }
    return out;
}

MatrixPolynomial MatrixPolynomial::derivative(int var) const
{
    MatrixPolynomial d(num_vars_, rows_, cols_);
    const auto v = static_cast<std::size_t>(var);
    for (const auto& t : terms_) {
        if (t.exponents[v] == 0) continue;
        auto e = t.exponents;
        const double c = e[v];
        e[v] -= 1;
        d.add_term(std::move(e), c * t.coeff);
    }
    return d;
}

bool MatrixPolynomial::depends_on(int var) const
{
    const auto v = static_cast<std::size_t>(var);
    return std::any_of(terms_.begin(), terms_.end(), [v](const Term& t) {
        return t.exponents[v] > 0 && t.coeff.cwiseAbs().maxCoeff() > 0.0;
    });
}

bool MatrixPolynomial::is_constant() const
{
    for (int i = 0; i < num_vars_; ++i)
        if (depends_on(i)) return false;
    return true;
}

int MatrixPolynomial::degree() const
{
    int deg = 0;
    for (const auto& t : terms_) {
        int d = 0;
        for (int e : t.exponents) d += e;
        deg = std::max(deg, d);
    }
    return deg;
}

MatrixPolynomial matrix_polynomial_from_json(const json& j, int num_vars, int rows, int cols)
{
    MatrixPolynomial p(num_vars, rows, cols);
    require(j.is_array(), "polynomial must be a list of terms");
    for (const auto& term : j) {
        require(term.contains("exponents") && term.contains("coeffs"),
                "polynomial term needs 'exponents' and 'coeffs'");
        p.add_term(term.at("exponents").get<std::vector<int>>(), matrix_from_json(term.at("coeffs"), rows, cols));
    }
    return p;
}

json to_json(const MatrixPolynomial& p)
{
    json out = json::array();
    for (const auto& t : p.terms()) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < t.coeff.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < t.coeff.cols(); ++c) row.push_back(t.coeff(r, c));
            rows.push_back(row);
        }
        out.push_back({{"exponents", t.exponents}, {"coeffs", rows}});
    }
    return out;
}

} // namespace rampc
