#pragma once

#include <stdexcept>

#include <Eigen/Dense>

#include "retrial/engine.hpp"
#include "retrial/estimators.hpp"

namespace retrial {

/// Balance equations over states (i,j), i in 0..m, j in 0..W, one row per
/// state in row-major (i,j) order, followed by the normalization row.
/// Unknown (i,j) sits in column i*(W+1)+j; unknowns at j = W+1 are closed to zero.
struct LinearSystem {
    SystemParams params;
    long truncation = 0;
    Eigen::MatrixXd matrix;  // ((m+1)(W+1) + 1) x (m+1)(W+1)
    Eigen::VectorXd rhs;

    long unknowns() const { return static_cast<long>(matrix.cols()); }
    long balance_rows() const { return static_cast<long>(matrix.rows()) - 1; }
    long column(int i, long j) const { return i * (truncation + 1) + j; }
};

struct SolveReport {
    FrequencyMatrix frequencies;
    double residual = 0.0;   // max |row residual| over the balance rows
    int clipped = 0;         // raw entries below zero before renormalization
    double condition = 0.0;  // sigma_max / sigma_min of the reduced problem
    bool ill_conditioned = false;
};

inline constexpr double kConditionWarning = 1e8;

class SystemTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Assembles the truncated balance system whose right-hand sides are
/// combinations of the measured jump functional. Throws SystemTooLarge when
/// (m+1)(W+1) exceeds `max_unknowns`.
LinearSystem assemble_system(const JumpFunctional& a, const SystemParams& params, long truncation,
                             long max_unknowns = 2500);

/// Least squares over the balance rows subject to the normalization row
/// holding exactly; negative entries are clipped and the vector renormalized.
SolveReport solve_frequencies(const LinearSystem& system);

/// Max-row residual of the balance equations at P, using W = P.truncation().
double verify_balance(const FrequencyMatrix& p, const JumpFunctional& a, const SystemParams& params);

}  // namespace retrial
