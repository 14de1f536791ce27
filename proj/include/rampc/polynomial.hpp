#pragma once

#include "rampc/types.hpp"

#include <vector>

namespace rampc {

/// Matrix-valued multivariate polynomial  P(x) = sum_t C_t * prod_i x_i^{e_{t,i}}.
class MatrixPolynomial {
public:
    struct Term {
        std::vector<int> exponents;
        Mat coeff;
    };

    MatrixPolynomial() = default;
    MatrixPolynomial(int num_vars, int rows, int cols);

    static MatrixPolynomial constant(int num_vars, const Mat& value);

    void add_term(std::vector<int> exponents, const Mat& coeff);

    int num_vars() const { return num_vars_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const std::vector<Term>& terms() const { return terms_; }

    Mat eval(const Vec& x) const;
    /// dP/dx_var evaluated at x.
    Mat partial(const Vec& x, int var) const;
    MatrixPolynomial derivative(int var) const;

    bool depends_on(int var) const;
    bool is_constant() const;
    int degree() const;

private:
    int num_vars_ = 0;
    int rows_ = 0;
    int cols_ = 0;
    std::vector<Term> terms_;
};

} // namespace rampc
