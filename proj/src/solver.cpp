#include "retrial/solver.hpp"

#include <cmath>
#include <string>

namespace retrial {

namespace {

// Visits the left-hand-side terms of the balance row for state (i,j):
//   i = 0:        mu1 P(1,j) - mu2 j P(0,j)
//   0 < i < m:    mu1 (i+1) P(i+1,j) - (mu1 i + mu2 j) P(i,j) + mu2 (j+1) P(i-1,j+1)
//   i = m:        mu2 (j+1) P(m-1,j+1) - mu1 m P(m,j)
// Terms with j+1 > W are dropped (truncation closure).
template <class Visit>
void for_each_term(const SystemParams& p, int i, long j, long truncation, Visit&& visit) {
    const int m = p.servers;
    const double jj = static_cast<double>(j);
    if (i == 0) {
        visit(1, j, p.mu1);
        if (j > 0) visit(0, j, -p.mu2 * jj);
        return;
    }
    if (i < m) {
        visit(i + 1, j, p.mu1 * (i + 1));
        visit(i, j, -(p.mu1 * i + p.mu2 * jj));
        if (j + 1 <= truncation) visit(i - 1, j + 1, p.mu2 * (jj + 1.0));
        return;
    }
    if (j + 1 <= truncation) visit(m - 1, j + 1, p.mu2 * (jj + 1.0));
    visit(m, j, -p.mu1 * m);
}

// a(m,-1) and a(-1,j) are identically zero; StateMatrix::at already reads
// out-of-range cells as zero.
double row_rhs(const JumpFunctional& a, int m, int i, long j) {
    if (i == 0) return a.at(0, j);
    if (i < m) return a.at(i, j) - a.at(i - 1, j);
    return a.at(m, j) - a.at(m - 1, j) - a.at(m, j - 1);
}

}  // namespace

LinearSystem assemble_system(const JumpFunctional& a, const SystemParams& params, long truncation,
                             long max_unknowns) {
    params.validate();
    if (truncation < 0) throw std::invalid_argument("truncation level must be >= 0");
    if (a.servers() != params.servers) {
        throw std::invalid_argument("jump functional server count does not match the system");
    }
    const int m = params.servers;
    const long n = (m + 1) * (truncation + 1);
    if (n > max_unknowns) {
        throw SystemTooLarge("truncation level W=" + std::to_string(truncation) + " needs " +
                             std::to_string(n) + " unknowns (cap " + std::to_string(max_unknowns) +
                             "); the orbit is too long for a direct solve, use a truncation method");
    }

    LinearSystem sys;
    sys.params = params;
    sys.truncation = truncation;
    sys.matrix = Eigen::MatrixXd::Zero(n + 1, n);
    sys.rhs = Eigen::VectorXd::Zero(n + 1);
    for (int i = 0; i <= m; ++i) {
        for (long j = 0; j <= truncation; ++j) {
            const long row = sys.column(i, j);
            for_each_term(params, i, j, truncation, [&](int ci, long cj, double coef) {
                sys.matrix(row, sys.column(ci, cj)) += coef;
            });
            sys.rhs(row) = row_rhs(a, m, i, j);
        }
    }
    sys.matrix.row(n).setOnes();
    sys.rhs(n) = 1.0;
    return sys;
}

SolveReport solve_frequencies(const LinearSystem& system) {
    const long n = system.unknowns();
    const long rows = system.balance_rows();
    const Eigen::MatrixXd balance = system.matrix.topRows(rows);
    const Eigen::VectorXd b = system.rhs.head(rows);
    if (b.cwiseAbs().maxCoeff() == 0.0) {
        throw SingularSystem("jump functional is identically zero; nothing to solve");
    }

    // Null-space method: x = x0 + Z y with 1'x0 = 1 and 1'Z = 0.
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd x0 = ones / static_cast<double>(n);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr{Eigen::MatrixXd(ones)};
    const Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd z = q.rightCols(n - 1);

    const Eigen::MatrixXd reduced = balance * z;
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(reduced, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    const double smax = sigma(0);
    const double smin = sigma(sigma.size() - 1);
    if (!(smax > 0.0) || smin <= smax * 1e-13) {
        throw SingularSystem("balance system is rank deficient (sigma_min/sigma_max = " +
                             std::to_string(smax > 0.0 ? smin / smax : 0.0) + ")");
    }
    const Eigen::VectorXd y = svd.solve(b - balance * x0);
    Eigen::VectorXd x = x0 + z * y;

    SolveReport report;
    report.condition = smax / smin;
    report.ill_conditioned = report.condition > kConditionWarning;
    for (long k = 0; k < n; ++k) {
        if (x(k) < 0.0) {
            x(k) = 0.0;
            ++report.clipped;
        }
    }
    const double total = x.sum();
    if (!(total > 0.0)) throw SingularSystem("solution vanished after clipping negatives");
    x /= total;

    report.residual = (balance * x - b).cwiseAbs().maxCoeff();
    const int m = system.params.servers;
    report.frequencies = FrequencyMatrix(m, system.truncation);
    for (int i = 0; i <= m; ++i) {
        for (long j = 0; j <= system.truncation; ++j) {
            report.frequencies.ref(i, j) = x(system.column(i, j));
        }
    }
    return report;
}

double verify_balance(const FrequencyMatrix& p, const JumpFunctional& a, const SystemParams& params) {
    params.validate();
    if (p.servers() != params.servers || a.servers() != params.servers) {
        throw std::invalid_argument("server count mismatch in balance check");
    }
    const int m = params.servers;
    const long w = p.truncation();
    double worst = 0.0;
    for (int i = 0; i <= m; ++i) {
        for (long j = 0; j <= w; ++j) {
            double lhs = 0.0;
            for_each_term(params, i, j, w, [&](int ci, long cj, double coef) { lhs += coef * p.at(ci, cj); });
            worst = std::max(worst, std::abs(lhs - row_rhs(a, m, i, j)));
        }
    }
    return worst;
}

}  // namespace retrial
