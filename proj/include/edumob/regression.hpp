#pragma once

// Dense OLS / two-stage least squares with heteroskedasticity-robust (HC1)
// standard errors. Small designs only (panel cells x a handful of columns),
// solved by column-pivoted QR so rank deficiencies can name the offending
// columns.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace edumob {

struct CollinearityError : std::runtime_error {
    explicit CollinearityError(std::vector<std::string> cols)
        : std::runtime_error("collinear design columns: " + join(cols)),
          columns(std::move(cols)) {}
    std::vector<std::string> columns;

  private:
    static std::string join(const std::vector<std::string>& cols) {
        std::string s;
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) s += ", ";
            s += cols[i];
        }
        return s;
    }
};

struct LinearFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd se;  // HC1
    Eigen::VectorXd residuals;
    double r2 = 0.0;
    std::size_t n = 0;
};

namespace reg_detail {

inline void check_full_rank(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr,
                            const std::vector<std::string>& names) {
    const auto rank = qr.rank();
    const auto cols = qr.matrixQR().cols();
    if (rank == cols) return;
    std::vector<std::string> bad;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index i = rank; i < cols; ++i) {
        const auto col = static_cast<std::size_t>(perm[i]);
        bad.push_back(col < names.size() ? names[col] : "col" + std::to_string(col));
    }
    throw CollinearityError(std::move(bad));
}

inline Eigen::MatrixXd xtx_inverse(const Eigen::MatrixXd& X) {
    const Eigen::MatrixXd xtx = X.transpose() * X;
    return xtx.ldlt().solve(Eigen::MatrixXd::Identity(X.cols(), X.cols()));
}

inline Eigen::VectorXd hc1_se(const Eigen::MatrixXd& X, const Eigen::VectorXd& resid,
                              const Eigen::MatrixXd& xtx_inv) {
    const auto n = X.rows();
    const auto k = X.cols();
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e2 = resid[i] * resid[i];
        meat.noalias() += e2 * X.row(i).transpose() * X.row(i);
    }
    const double dof_adj =
        n > k ? static_cast<double>(n) / static_cast<double>(n - k) : 1.0;
    const Eigen::MatrixXd cov = dof_adj * xtx_inv * meat * xtx_inv;
    Eigen::VectorXd se(k);
    for (Eigen::Index j = 0; j < k; ++j) se[j] = std::sqrt(std::max(cov(j, j), 0.0));
    return se;
}

}  // namespace reg_detail

inline LinearFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const std::vector<std::string>& col_names) {
    if (X.rows() != y.size()) {
        throw std::invalid_argument("fit_ols: X and y row counts differ");
    }
    if (X.rows() <= X.cols()) {
        throw std::invalid_argument("fit_ols: need more observations than columns");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    reg_detail::check_full_rank(qr, col_names);

    LinearFit fit;
    fit.n = static_cast<std::size_t>(X.rows());
    fit.beta = qr.solve(y);
    fit.residuals = y - X * fit.beta;
    const Eigen::MatrixXd xtx_inv = reg_detail::xtx_inverse(X);
    fit.se = reg_detail::hc1_se(X, fit.residuals, xtx_inv);

    const double ybar = y.mean();
    const double tss = (y.array() - ybar).matrix().squaredNorm();
    const double rss = fit.residuals.squaredNorm();
    fit.r2 = tss > 0.0 ? 1.0 - rss / tss : 0.0;
    return fit;
}

struct FirstStageFit {
    std::string regressor;
    double slope = 0.0;  // coefficient on the instrument
    double se = 0.0;
    double f_stat = 0.0;
};

struct TwoSlsFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd se;  // HC1 using second-stage structural residuals
    std::vector<FirstStageFit> first_stages;
    bool weak_instrument = false;  // any first-stage F below 4
    std::size_t n = 0;
};

// X = [endogenous | exogenous] columns; each endogenous column j has
// instrument Z.col(j). Exogenous columns instrument themselves.
inline TwoSlsFit fit_2sls(const Eigen::MatrixXd& X_endog, const Eigen::MatrixXd& Z,
                          const Eigen::MatrixXd& X_exog, const Eigen::VectorXd& y,
                          const std::vector<std::string>& endog_names,
                          const std::vector<std::string>& exog_names) {
    const auto n = y.size();
    const auto k_end = X_endog.cols();
    const auto k_exo = X_exog.cols();
    if (X_endog.rows() != n || X_exog.rows() != n || Z.rows() != n || Z.cols() != k_end) {
        throw std::invalid_argument("fit_2sls: inconsistent dimensions");
    }
    if (k_end == 0) {
        throw std::invalid_argument("fit_2sls: no instrumented columns");
    }

    // First-stage design: all instruments plus the exogenous columns.
    Eigen::MatrixXd W(n, k_end + k_exo);
    W.leftCols(k_end) = Z;
    W.rightCols(k_exo) = X_exog;
    std::vector<std::string> w_names;
    for (const auto& s : endog_names) w_names.push_back("instrument(" + s + ")");
    for (const auto& s : exog_names) w_names.push_back(s);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_w(W);
    reg_detail::check_full_rank(qr_w, w_names);

    TwoSlsFit fit;
    fit.n = static_cast<std::size_t>(n);
    Eigen::MatrixXd X_hat(n, k_end + k_exo);
    X_hat.rightCols(k_exo) = X_exog;

    const Eigen::MatrixXd wtw_inv = reg_detail::xtx_inverse(W);
    for (Eigen::Index j = 0; j < k_end; ++j) {
        const Eigen::VectorXd xj = X_endog.col(j);
        const Eigen::VectorXd gamma = qr_w.solve(xj);
        X_hat.col(j) = W * gamma;
        const Eigen::VectorXd resid = xj - X_hat.col(j);
        const Eigen::VectorXd se = reg_detail::hc1_se(W, resid, wtw_inv);
        FirstStageFit fs;
        fs.regressor = endog_names[static_cast<std::size_t>(j)];
        fs.slope = gamma[j];
        fs.se = se[j];
        fs.f_stat = fs.se > 0.0 ? (fs.slope / fs.se) * (fs.slope / fs.se) : 0.0;
        if (fs.f_stat < 4.0) fit.weak_instrument = true;
        fit.first_stages.push_back(fs);
    }

    std::vector<std::string> names = endog_names;
    names.insert(names.end(), exog_names.begin(), exog_names.end());
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_hat(X_hat);
    reg_detail::check_full_rank(qr_hat, names);
    fit.beta = qr_hat.solve(y);

    // Structural residuals use the observed regressors, not the fitted ones.
    Eigen::MatrixXd X_obs(n, k_end + k_exo);
    X_obs.leftCols(k_end) = X_endog;
    X_obs.rightCols(k_exo) = X_exog;
    const Eigen::VectorXd resid = y - X_obs * fit.beta;
    const Eigen::MatrixXd xtx_inv = reg_detail::xtx_inverse(X_hat);
    fit.se = reg_detail::hc1_se(X_hat, resid, xtx_inv);
    return fit;
}

}  // namespace edumob
