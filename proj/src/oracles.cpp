#include "retrial/oracles.hpp"

#include <cmath>
#include <string>

namespace retrial {

CtmcModel build_markov_generator(double lambda, const SystemParams& params, long truncation,
                                 long max_states) {
    params.validate();
    if (!(std::isfinite(lambda) && lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (truncation < 0) throw std::invalid_argument("orbit truncation must be >= 0");
    const int m = params.servers;
    const long n = (m + 1) * (truncation + 1);
    if (n > max_states) {
        throw OracleError("CTMC with " + std::to_string(n) + " states exceeds the cap of " +
                          std::to_string(max_states));
    }

    CtmcModel model;
    model.lambda = lambda;
    model.params = params;
    model.truncation = truncation;
    model.generator = Eigen::MatrixXd::Zero(n, n);
    auto& g = model.generator;

    for (int i = 0; i <= m; ++i) {
        for (long j = 0; j <= truncation; ++j) {
            const long from = model.index(i, j);
            if (i < m) {
                g(from, model.index(i + 1, j)) += lambda;
            } else if (j < truncation) {
                g(from, model.index(m, j + 1)) += lambda;
            }
            if (i > 0) g(from, model.index(i - 1, j)) += params.mu1 * i;
            if (i < m && j > 0) g(from, model.index(i + 1, j - 1)) += params.mu2 * static_cast<double>(j);
            g(from, from) = -g.row(from).sum();
        }
    }
    return model;
}

StationaryResult stationary_distribution(const CtmcModel& model) {
    const long n = model.states();
    Eigen::MatrixXd a = model.generator.transpose();
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) throw OracleError("generator system is singular");
    const Eigen::VectorXd pi = lu.solve(b);
    if (!pi.allFinite()) throw OracleError("stationary solve produced non-finite values");

    StationaryResult result;
    result.residual = (pi.transpose() * model.generator).cwiseAbs().maxCoeff();
    result.pi = FrequencyMatrix(model.params.servers, model.truncation);
    for (int i = 0; i <= model.params.servers; ++i) {
        for (long j = 0; j <= model.truncation; ++j) {
            // Round-off can leave -1e-18 in far tail cells.
            result.pi.ref(i, j) = std::max(0.0, pi(model.index(i, j)));
        }
    }
    return result;
}

double dm2_phi() {
    const auto f = [](double z) { return std::log(z) - 2.0 * z + 2.0; };
    double lo = 1e-6;
    double hi = 1.0 - 1e-6;
    // f(lo) < 0 < f(hi); z = 1 is the trivial root just above the bracket.
    while (hi - lo > 1e-14) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Dm2Reference dm2_reference() {
    Dm2Reference d;
    d.phi = dm2_phi();
    d.psi1 = std::exp(-1.0);
    d.psi2 = std::exp(-2.0);
    d.c1 = d.psi1 / (1.0 - d.psi1);
    d.c2 = d.c1 * d.psi2 / (1.0 - d.psi2);

    const double tail = 1.0 / (1.0 - d.phi);
    const double term1 = 2.0 / (d.c1 * (1.0 - d.psi1)) * (2.0 * (1.0 - d.psi1) - 1.0) /
                         (2.0 * (1.0 - d.phi) - 1.0);
    const double term2 = 1.0 / (d.c2 * (1.0 - d.psi2)) * (2.0 * (1.0 - d.psi2) - 2.0) /
                         (2.0 * (1.0 - d.phi) - 2.0);
    d.r = 1.0 / (tail + term1 + term2);
    d.u0 = 1.0 - d.r / (1.0 - d.phi);
    d.u1 = d.r * d.c1 * term2;
    return d;
}

double Dm2Reference::embedded(long k) const {
    if (k < 0) return 0.0;
    if (k == 0) return u0 - u1;
    if (k == 1) return u1;
    return r * std::pow(phi, static_cast<double>(k - 2));
}

double Dm2Reference::time_average(long k) const {
    if (k < 0) return 0.0;
    if (k == 0) return 0.5 * (1.0 - embedded(0));
    if (k == 1) return embedded(0);
    return 0.5 * embedded(k - 1);
}

double Dm2Reference::total_mass() const {
    return time_average(0) + time_average(1) + 0.5 * (embedded(1) + r / (1.0 - phi));
}

FrequencyMatrix Dm2Reference::as_frequencies(long max_level) const {
    FrequencyMatrix p(2, std::max(max_level - 2, 0L));
    for (long k = 0; k <= max_level; ++k) {
        if (k <= 2) {
            p.ref(static_cast<int>(k), 0) = time_average(k);
        } else {
            p.ref(2, k - 2) = time_average(k);
        }
    }
    return p;
}

}  // namespace retrial
