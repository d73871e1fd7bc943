#include "airgam/gam.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "airgam/errors.hpp"
#include "airgam/probability.hpp"

namespace airgam {

namespace {

constexpr double kDevianceTol = 1e-9;
constexpr int kMaxIterations = 100;
constexpr int kMaxHalvings = 10;

double poisson_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
    double d = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        double term = y(i) - mu(i);
        if (y(i) > 0.0) term = y(i) * std::log(y(i) / mu(i)) - term;
        else term = -term;
        // Each unit deviance is >= 0; drop float dust near saturation.
        d += std::max(0.0, term);
    }
    return 2.0 * d;
}

// Column-equilibrated solve of the weighted normal equations. Returns false
// when the scaled normal matrix is numerically singular.
class WeightedSolver {
  public:
    explicit WeightedSolver(const Eigen::MatrixXd& x) : x_(x), scale_(x.cols()) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double norm = x.col(j).norm();
            scale_(j) = norm > 0.0 ? 1.0 / norm : 1.0;
        }
    }

    bool solve(const Eigen::VectorXd& w, const Eigen::VectorXd& z, Eigen::VectorXd& beta) {
        const Eigen::Index p = x_.cols();
        const Eigen::ArrayXd sqrt_w = w.array().sqrt();
        Eigen::MatrixXd xw = x_;
        xw.array().colwise() *= sqrt_w;
        Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(p, p);
        normal.selfadjointView<Eigen::Lower>().rankUpdate(xw.transpose());
        normal = normal.selfadjointView<Eigen::Lower>();
        Eigen::VectorXd rhs = xw.transpose() * (z.array() * sqrt_w).matrix();
        normal = scale_.asDiagonal() * normal * scale_.asDiagonal();
        rhs = scale_.asDiagonal() * rhs;
        ldlt_.compute(normal);
        if (ldlt_.info() != Eigen::Success) return false;
        const double dmax = ldlt_.vectorD().cwiseAbs().maxCoeff();
        const double dmin = ldlt_.vectorD().minCoeff();
        if (!(dmax > 0.0) || dmin < dmax * 1e-13) return false;
        beta = scale_.asDiagonal() * ldlt_.solve(rhs);
        return true;
    }

    Eigen::MatrixXd inverse_normal() const {
        const Eigen::Index p = x_.cols();
        const Eigen::MatrixXd inv = ldlt_.solve(Eigen::MatrixXd::Identity(p, p));
        Eigen::MatrixXd out = scale_.asDiagonal() * inv * scale_.asDiagonal();
        out = 0.5 * (out + out.transpose()).eval();  // exact symmetry
        return out;
    }

  private:
    const Eigen::MatrixXd& x_;
    Eigen::VectorXd scale_;
    Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

[[noreturn]] void throw_rank_deficient(const Eigen::MatrixXd& x,
                                       const std::vector<std::string>& names) {
    Eigen::MatrixXd scaled = x;
    for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
        const double norm = scaled.col(j).norm();
        if (norm > 0.0) scaled.col(j) /= norm;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    qr.setThreshold(1e-9);
    const Eigen::Index rank = qr.rank();
    std::ostringstream msg;
    msg << "rank-deficient design (rank " << rank << " of " << x.cols()
        << "); collinear columns:";
    const auto perm = qr.colsPermutation().indices();
    for (Eigen::Index j = rank; j < x.cols(); ++j) {
        msg << ' ' << names[static_cast<std::size_t>(perm(j))];
    }
    throw std::runtime_error(msg.str());
}

}  // namespace

Eigen::VectorXd GamFit::standard_errors() const { return standard_errors(dispersion); }

Eigen::VectorXd GamFit::standard_errors(double dispersion_override) const {
    return (covariance_unscaled.diagonal() * dispersion_override).cwiseMax(0.0).cwiseSqrt();
}

Eigen::VectorXd GamFit::t_values() const {
    const Eigen::VectorXd se = standard_errors();
    Eigen::VectorXd t(coefficients.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        t(i) = se(i) > 0.0 ? coefficients(i) / se(i) : std::numeric_limits<double>::infinity();
    }
    return t;
}

Eigen::VectorXd GamFit::p_values() const {
    const Eigen::VectorXd t = t_values();
    const double dof = static_cast<double>(n_used) - edf;
    Eigen::VectorXd p(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) p(i) = student_t_two_sided_p(t(i), dof);
    return p;
}

int GamFit::term_index(const std::string& name) const {
    for (std::size_t i = 0; i < term_names.size(); ++i) {
        if (term_names[i] == name) return static_cast<int>(i);
    }
    return -1;
}

AssembledDesign assemble_design(const Series& response, const std::vector<NamedColumn>& parametric,
                                const std::vector<GamSmoothSpec>& smooths, const DailyPanel& panel,
                                const std::vector<bool>* exclude) {
    const std::size_t n = panel.size();
    if (response.size() != n) throw std::invalid_argument("response length != panel length");
    for (const auto& col : parametric) {
        if (static_cast<std::size_t>(col.values.size()) != n) {
            throw std::invalid_argument("parametric column '" + col.name +
                                        "' length != panel length");
        }
    }
    if (exclude != nullptr && exclude->size() != n) {
        throw std::invalid_argument("exclude mask length != panel length");
    }

    // Smooth inputs.
    std::vector<std::pair<std::string, Series>> smooth_vars;
    for (const auto& s : smooths) {
        if (s.df < 1) throw std::invalid_argument("smooth df must be >= 1");
        if (s.variable == "time_index") {
            Series t(n);
            for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i);
            smooth_vars.emplace_back(s.variable, std::move(t));
        } else {
            const Series* v = panel.find_series(s.variable);
            if (v == nullptr) {
                throw std::invalid_argument("smooth variable not in panel: " + s.variable);
            }
            smooth_vars.emplace_back(s.variable, *v);
        }
    }

    AssembledDesign out;
    for (std::size_t i = 0; i < n; ++i) {
        if (exclude != nullptr && (*exclude)[i]) continue;
        if (is_missing(response[i])) continue;
        bool ok = true;
        for (const auto& col : parametric) {
            if (std::isnan(col.values(static_cast<Eigen::Index>(i)))) {
                ok = false;
                break;
            }
        }
        for (const auto& [name, values] : smooth_vars) {
            if (is_missing(values[i])) {
                ok = false;
                break;
            }
        }
        if (ok) out.used_rows.push_back(i);
    }

    const auto m = static_cast<Eigen::Index>(out.used_rows.size());
    int p_total = 1 + static_cast<int>(parametric.size());
    for (const auto& s : smooths) p_total += s.df;
    if (m <= p_total + 10) {
        throw InsufficientSupportError("insufficient support: " + std::to_string(m) +
                                    " usable rows for " + std::to_string(p_total) + " columns");
    }

    out.y.resize(m);
    for (Eigen::Index r = 0; r < m; ++r) out.y(r) = response[out.used_rows[r]];

    std::vector<Eigen::MatrixXd> smooth_blocks;
    for (std::size_t k = 0; k < smooths.size(); ++k) {
        std::vector<double> values(m);
        for (Eigen::Index r = 0; r < m; ++r) {
            values[static_cast<std::size_t>(r)] = smooth_vars[k].second[out.used_rows[r]];
        }
        auto [def, basis] = make_natural_basis(values, smooths[k].df, smooth_vars[k].first);
        out.smooth_bases.push_back(def);
        smooth_blocks.push_back(std::move(basis.values));
    }

    Eigen::Index p = 1 + static_cast<Eigen::Index>(parametric.size());
    for (const auto& block : smooth_blocks) p += block.cols();

    out.X.resize(m, p);
    out.names.clear();
    out.X.col(0).setOnes();
    out.names.emplace_back("(Intercept)");
    Eigen::Index col = 1;
    for (const auto& pcol : parametric) {
        for (Eigen::Index r = 0; r < m; ++r) {
            out.X(r, col) = pcol.values(static_cast<Eigen::Index>(out.used_rows[r]));
        }
        out.names.push_back(pcol.name);
        ++col;
    }
    for (std::size_t k = 0; k < smooth_blocks.size(); ++k) {
        const auto& block = smooth_blocks[k];
        out.X.middleCols(col, block.cols()) = block;
        for (Eigen::Index j = 0; j < block.cols(); ++j) {
            out.names.push_back("s(" + out.smooth_bases[k].variable_name + ")." +
                                std::to_string(j + 1));
        }
        col += block.cols();
    }
    return out;
}

GamFit fit_quasipoisson(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                        std::vector<std::string> term_names) {
    const Eigen::Index n = design.rows();
    const Eigen::Index p = design.cols();
    if (response.size() != n) throw std::invalid_argument("fit_quasipoisson: size mismatch");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (response(i) < 0.0) {
            throw std::invalid_argument("fit_quasipoisson: negative response at used row " +
                                        std::to_string(i));
        }
    }

    GamFit fit;
    fit.term_names = std::move(term_names);
    fit.n_used = n;
    fit.edf = static_cast<double>(p);

    // mu(0) = y + 0.5 guards log(0).
    Eigen::VectorXd mu = response.array() + 0.5;
    Eigen::VectorXd eta = mu.array().log();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    bool have_beta = false;
    double dev = poisson_deviance(response, mu);

    WeightedSolver solver(design);
    fit.converged = false;

    for (int iter = 0; iter < kMaxIterations; ++iter) {
        const Eigen::VectorXd w = mu;
        const Eigen::VectorXd z = eta.array() + (response - mu).array() / mu.array();
        Eigen::VectorXd beta_new;
        if (!solver.solve(w, z, beta_new)) throw_rank_deficient(design, fit.term_names);

        // Linear predictor clamped to a numerically safe band before exp.
        Eigen::VectorXd eta_new = (design * beta_new).array().min(300.0).max(-30.0);
        Eigen::VectorXd mu_new = eta_new.array().exp();
        double dev_new = poisson_deviance(response, mu_new);

        int halvings = 0;
        while ((!std::isfinite(dev_new) || dev_new > dev * (1.0 + 1e-12)) && have_beta &&
               halvings < kMaxHalvings) {
            beta_new = 0.5 * (beta_new + beta);
            eta_new = (design * beta_new).array().min(300.0).max(-30.0);
            mu_new = eta_new.array().exp();
            dev_new = poisson_deviance(response, mu_new);
            ++halvings;
        }
        if (!std::isfinite(dev_new) || (have_beta && dev_new > dev * (1.0 + 1e-12))) {
            break;  // could not decrease deviance; report last accepted iterate
        }

        beta = beta_new;
        eta = eta_new;
        mu = mu_new;
        fit.iterations = iter + 1;
        fit.deviance_trace.push_back(dev_new);
        const bool small_change = std::fabs(dev - dev_new) < kDevianceTol * (std::fabs(dev_new) + 0.1);
        dev = dev_new;
        if (have_beta && small_change) {
            fit.converged = true;
            // A couple of extra Newton steps pin the quasi-score equations
            // X'(y - mu) = 0 to numerical zero.
            for (int polish = 0; polish < 3; ++polish) {
                const double score = (design.transpose() * (response - mu)).cwiseAbs().maxCoeff();
                if (score < 1e-8) break;
                const Eigen::VectorXd wp = mu;
                const Eigen::VectorXd zp = eta.array() + (response - mu).array() / mu.array();
                Eigen::VectorXd bp;
                if (!solver.solve(wp, zp, bp)) break;
                const Eigen::VectorXd ep = (design * bp).array().min(300.0).max(-30.0);
                const Eigen::VectorXd mp = ep.array().exp();
                const double dp = poisson_deviance(response, mp);
                if (!std::isfinite(dp) || dp > dev * (1.0 + 1e-10)) break;
                beta = bp;
                eta = ep;
                mu = mp;
                dev = dp;
            }
            break;
        }
        have_beta = true;
    }

    // Final weighted solve state for the covariance.
    {
        Eigen::VectorXd dummy;
        const Eigen::VectorXd z = eta.array() + (response - mu).array() / mu.array();
        if (!solver.solve(mu, z, dummy)) throw_rank_deficient(design, fit.term_names);
    }

    fit.coefficients = beta;
    fit.fitted_mu = mu;
    fit.deviance = dev;
    fit.covariance_unscaled = solver.inverse_normal();

    fit.pearson_residuals.resize(n);
    fit.deviance_residuals.resize(n);
    double pearson_chi2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = (response(i) - mu(i)) / std::sqrt(mu(i));
        fit.pearson_residuals(i) = r;
        pearson_chi2 += r * r;
        double unit = response(i) - mu(i);
        if (response(i) > 0.0) unit = response(i) * std::log(response(i) / mu(i)) - unit;
        else unit = -unit;
        fit.deviance_residuals(i) =
            (response(i) >= mu(i) ? 1.0 : -1.0) * std::sqrt(std::max(0.0, 2.0 * unit));
    }
    const double resid_dof = static_cast<double>(n) - fit.edf;
    fit.dispersion = pearson_chi2 / resid_dof;
    fit.gcv = static_cast<double>(n) * fit.deviance / (resid_dof * resid_dof);
    fit.qaic = fit.dispersion > 0.0
                   ? qaic_score(fit.deviance, fit.dispersion, fit.edf)
                   : std::numeric_limits<double>::quiet_NaN();
    return fit;
}

GamFit fit(const ModelSpec& spec, const DailyPanel& panel, const std::vector<bool>* exclude) {
    auto it = panel.outcomes.find(spec.response);
    if (it == panel.outcomes.end()) {
        throw std::invalid_argument("response stratum not in panel: " + spec.response);
    }
    AssembledDesign design = assemble_design(it->second, spec.parametric, spec.smooths, panel,
                                             exclude);
    GamFit result = fit_quasipoisson(design.X, design.y, std::move(design.names));
    result.used_rows = std::move(design.used_rows);
    result.smooth_bases = std::move(design.smooth_bases);
    return result;
}

double dispersion(const GamFit& fit) {
    if (static_cast<double>(fit.n_used) <= fit.edf) {
        throw std::invalid_argument("dispersion: n_used must exceed edf");
    }
    return fit.dispersion;
}

double gcv_score(const GamFit& fit) {
    const double n = static_cast<double>(fit.n_used);
    if (n <= fit.edf) throw std::invalid_argument("gcv_score: n must exceed edf");
    const double denom = n - fit.edf;
    return n * fit.deviance / (denom * denom);
}

double qaic_score(double deviance, double phi_hat, double edf) {
    if (!(phi_hat > 0.0)) throw std::invalid_argument("qaic: dispersion must be > 0");
    return deviance / phi_hat + 2.0 * edf;
}

double qaic(const GamFit& fit, double phi_hat) {
    return qaic_score(fit.deviance, phi_hat, fit.edf);
}

double bic_score(double deviance, double phi_hat, double edf, Eigen::Index n_used) {
    if (!(phi_hat > 0.0)) throw std::invalid_argument("bic: dispersion must be > 0");
    return deviance / phi_hat + std::log(static_cast<double>(n_used)) * edf;
}

GaussianFit fit_gaussian(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                         std::vector<std::string> term_names) {
    if (design.rows() != response.size()) {
        throw std::invalid_argument("fit_gaussian: size mismatch");
    }
    GaussianFit fit;
    fit.term_names = std::move(term_names);
    fit.n_used = design.rows();
    fit.edf = static_cast<double>(design.cols());
    WeightedSolver solver(design);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(design.rows());
    if (!solver.solve(ones, response, fit.coefficients)) {
        throw_rank_deficient(design, fit.term_names);
    }
    fit.fitted = design * fit.coefficients;
    fit.residuals = response - fit.fitted;
    fit.rss = fit.residuals.squaredNorm();
    const double n = static_cast<double>(fit.n_used);
    const double denom = n - fit.edf;
    if (denom <= 0.0) throw std::invalid_argument("fit_gaussian: n must exceed column count");
    fit.gcv = n * fit.rss / (denom * denom);
    return fit;
}

}  // namespace airgam
