#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cvbandit {

/// One round's draw from an arm: the reward and the side-information
/// observed alongside it.
struct ObservationPair {
    double reward = 0.0;
    double side_info = 0.0;
};

/// Per-arm history of (reward, side-information) pairs plus the known mean
/// of the side-information. Keeps running sums so means are O(1).
class SampleBuffer {
public:
    explicit SampleBuffer(double omega = 0.0) : omega_(omega) {}
    SampleBuffer(std::vector<double> xs, std::vector<double> ws, double omega);

    void push(double x, double w);
    void push(const ObservationPair& obs) { push(obs.reward, obs.side_info); }

    std::size_t size() const noexcept { return xs_.size(); }
    bool empty() const noexcept { return xs_.empty(); }
    std::span<const double> xs() const noexcept { return xs_; }
    std::span<const double> ws() const noexcept { return ws_; }

    double omega() const noexcept { return omega_; }
    void set_omega(double omega) noexcept { omega_ = omega; }

    double mean_x() const;
    double mean_w() const;

private:
    std::vector<double> xs_;
    std::vector<double> ws_;
    double omega_;
    double sum_x_ = 0.0;
    double sum_w_ = 0.0;
};

/// Where the side-information is centered when estimating the coefficient.
///
/// sample_mean: sum (X - mean X)(W - mean W) / sum (W - mean W)^2, the
///   least-squares slope. This is the form under which the estimated-beta
///   variance law and the unbiased variance estimator hold.
/// known_mean: sum (X - mean X)(W - omega) / sum (W - omega)^2, centering
///   W at its known mean.
enum class BetaCentering { sample_mean, known_mean };

enum class VarianceFormula {
    // S^2 (1/s + (omega_hat - omega)^2 / sum (W - omega_hat)^2)
    regression,
    // S^2 (1/s - (sum (W - omega))^2 / (s^2 sum (W - omega_hat)^2))^-1;
    // kept for comparison, it is biased and can be negative.
    inverse_correction,
};

struct EstimatorOptions {
    BetaCentering centering = BetaCentering::sample_mean;
    VarianceFormula variance = VarianceFormula::regression;
    // false forces beta := 0 (plain sample mean, classical variance).
    bool use_side_info = true;
};

/// Output of the estimator stack for one buffer.
struct CvEstimate {
    double mean = 0.0;      // point estimate of the arm mean
    double variance = 0.0;  // estimated variance of `mean`
    double beta = 0.0;      // coefficient applied to (omega - W)
    std::size_t n = 0;      // samples used
    std::int64_t dof = 0;   // degrees of freedom for the t percentile
    bool side_info_used = false;
};

/// Threshold below which sum of squared SI deviations counts as zero:
/// 1e-12 * max(1, s * omega^2).
double degenerate_threshold(std::size_t s, double omega);

double optimal_beta(double cov_xw, double var_w);

/// x + beta (omega - w)
inline double transform_sample(double x, double w, double omega, double beta) {
    return x + beta * (omega - w);
}

double beta_hat(const SampleBuffer& buf, BetaCentering centering = BetaCentering::sample_mean);

/// mean X + beta_hat (omega - mean W)
double cv_point_estimate(const SampleBuffer& buf,
                         BetaCentering centering = BetaCentering::sample_mean);

/// Estimated variance of cv_point_estimate. Requires s >= 4.
double cv_variance_estimate(const SampleBuffer& buf, const EstimatorOptions& options = {});

/// percentile_v(t, alpha, s - 2) * sqrt(cv_variance_estimate)
double confidence_radius(const SampleBuffer& buf, std::int64_t t, double alpha,
                         const EstimatorOptions& options = {});

/// Sample mean, variance of the mean with the (s - 1) divisor, dof s - 1.
CvEstimate plain_estimate(const SampleBuffer& buf);

/// Full estimate used by the policies. Never throws DegenerateSideInfo:
/// a degenerate buffer falls back to plain_estimate. Throws
/// InsufficientSamples when s < 4 (or s < 2 with side-info disabled).
CvEstimate estimate(const SampleBuffer& buf, const EstimatorOptions& options = {});

/// Leave-one-out transformed samples: sample j uses the coefficient
/// estimated from the buffer without pair j.
std::vector<double> split_transformed_samples(
    const SampleBuffer& buf, BetaCentering centering = BetaCentering::sample_mean);

struct SplitEstimate {
    double mean = 0.0;
    double variance = 0.0;  // sum (Xs_j - mean)^2 / (s (s - 1))
};

SplitEstimate split_estimate(const SampleBuffer& buf,
                             BetaCentering centering = BetaCentering::sample_mean);

// ---------------------------------------------------------------------------
// Several side-informations per draw.

class MultiSampleBuffer {
public:
    explicit MultiSampleBuffer(std::vector<double> omegas);

    void push(double x, std::span<const double> w);

    std::size_t size() const noexcept { return xs_.size(); }
    std::size_t q() const noexcept { return omegas_.size(); }
    std::span<const double> xs() const noexcept { return xs_; }
    std::span<const double> omegas() const noexcept { return omegas_; }
    // Row r of the s x q side-information matrix.
    std::span<const double> w_row(std::size_t r) const;
    double w(std::size_t r, std::size_t j) const { return ws_[r * q() + j]; }

private:
    std::vector<double> xs_;
    std::vector<double> ws_;  // row-major
    std::vector<double> omegas_;
};

/// (W'W - s w_hat w_hat')^-1 (W'X - s w_hat mu_hat), solved by LU with
/// partial pivoting. Throws SingularSideInfo when a pivot falls below
/// 1e-10 of the largest entry, InsufficientSamples when s < q + 2.
std::vector<double> multi_beta_hat(const MultiSampleBuffer& buf);

/// mean X + beta' (omegas - w_hat)
double multi_cv_point_estimate(const MultiSampleBuffer& buf);

/// S^2 (1/s + d' (Wc'Wc)^-1 d), d = w_hat - omegas, S^2 with s - q - 1
/// divisor. Requires s >= q + 3.
double multi_cv_variance_estimate(const MultiSampleBuffer& buf);

/// Solve A x = b for a small dense n x n row-major system with partial
/// pivoting. Throws SingularSideInfo on a relative pivot below `cutoff`.
std::vector<double> solve_pivoted(std::vector<double> a, std::vector<double> b,
                                  double cutoff = 1e-10);

} // namespace cvbandit
